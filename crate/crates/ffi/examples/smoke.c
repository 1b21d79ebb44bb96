#include <math.h>
#include <stdio.h>
#include "bosonic_fridge.h"

int main(void) {
    BfParams *p = NULL;
    char msg[256];
    if (bf_params_from_preset("table1", &p) != BF_STATUS_OK) {
        bf_last_error_message(msg, sizeof msg);
        fprintf(stderr, "%s\n", msg);
        return 1;
    }
    bf_params_set_dims(p, 6, 20, 6);
    BfSteadyReport r;
    if (bf_steady_report(p, &r) != BF_STATUS_OK) {
        bf_last_error_message(msg, sizeof msg);
        fprintf(stderr, "%s\n", msg);
        return 1;
    }
    printf("theta_c_mk=%.6f ratio=%.6f\n", r.theta_c_mk, r.ratio);

    BfStatus bad = bf_params_from_preset("nope", &p);
    bf_last_error_message(msg, sizeof msg);
    printf("unknown preset -> %d (%s)\n", (int)bad, msg);
    bf_params_free(p);
    return (r.ratio > 0.0 && r.ratio < 1.0 && bad == BF_STATUS_VALIDATION) ? 0 : 2;
}
