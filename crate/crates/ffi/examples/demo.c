#include <stdio.h>
#include <stdlib.h>

#include "pansharp.h"

int main(void) {
    PsImage *truth = NULL, *ms = NULL, *pan = NULL, *fused = NULL;
    if (ps_synth(7, 64, 4, 3, &truth, &ms, &pan) != PS_STATUS_OK) {
        fprintf(stderr, "synth: %s\n", ps_last_error_message());
        return 1;
    }
    PsFusionOptions opts = ps_fusion_options_default(PS_METHOD_DWT_ATROUS);
    if (ps_fuse(ms, pan, &opts, &fused) != PS_STATUS_OK) {
        fprintf(stderr, "fuse: %s\n", ps_last_error_message());
        return 1;
    }
    PsMetrics m;
    if (ps_metrics(truth, fused, pan, 0.25, &m) != PS_STATUS_OK) {
        fprintf(stderr, "metrics: %s\n", ps_last_error_message());
        return 1;
    }
    printf("%zux%zux%zu cc=%.4f ergas=%.4f scc=%.4f\n", ps_image_width(fused), ps_image_height(fused),
           ps_image_bands(fused), m.cc, m.ergas, m.scc);

    PsFusionOptions bad = opts;
    bad.ratio = 2;
    PsImage *none = NULL;
    int status = ps_fuse(ms, pan, &bad, &none);
    printf("mismatch status=%d\n", status);

    ps_image_free(fused);
    ps_image_free(pan);
    ps_image_free(ms);
    ps_image_free(truth);
    return status == PS_STATUS_DIMENSION_MISMATCH ? 0 : 1;
}
