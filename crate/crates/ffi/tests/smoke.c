#include <math.h>
#include <stdio.h>
#include "vortexlab.h"

int main(void) {
    double xs[1] = {0.5}, ys[1] = {0.5};
    int32_t m[1] = {1};
    VlVortex *v = NULL;
    if (vl_classical_solve(1.0, 1.0, 32, 32, 0.3, xs, ys, m, 1, &v) != VL_STATUS_OK) {
        char buf[256];
        vl_last_error_message(buf, sizeof buf);
        fprintf(stderr, "solve failed: %s\n", buf);
        return 1;
    }
    double integrated, chern;
    vl_vortex_identities(v, &integrated, &chern);
    vl_vortex_free(v);
    if (fabs(integrated) > 1e-6 || fabs(chern) > 1e-8) {
        return 2;
    }
    /* ε = 0.45 breaks the Bradlow bound on the unit torus */
    if (vl_classical_solve(1.0, 1.0, 32, 32, 0.45, xs, ys, m, 1, &v) != VL_STATUS_BRADLOW || v != NULL) {
        return 3;
    }
    printf("ok %s\n", vl_version());
    return 0;
}
