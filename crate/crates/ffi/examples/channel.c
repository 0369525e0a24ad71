/* Solves the straight channel and prints the pressure drop and centre velocity. */
#include <stdio.h>

#include "ratstokes.h"

int main(void) {
    RsSolution *solution = NULL;
    const char *config = "{\"schema_version\": 1, \"case\": \"constricted-channel\", \"params\": {\"lambda\": 0.0}}";
    if (rs_solve_config_json(config, &solution) != RS_STATUS_OK) {
        fprintf(stderr, "solve failed: %s\n", rs_last_error_message());
        return 1;
    }
    double digits = 0.0, drop = 0.0;
    RsFields fields;
    if (rs_boundary_accuracy_digits(solution, &digits) != RS_STATUS_OK ||
        rs_pressure_drop(solution, &drop) != RS_STATUS_OK ||
        rs_eval_fields(solution, 0.0, 0.5, &fields) != RS_STATUS_OK) {
        fprintf(stderr, "query failed: %s\n", rs_last_error_message());
        rs_solution_free(solution);
        return 1;
    }
    printf("digits %.1f\ndrop %.9f\nu %.9f\n", digits, drop, fields.u);
    rs_solution_free(solution);
    return rs_solve_case("no-such-case", &solution) == RS_STATUS_INVALID_CONFIG ? 0 : 1;
}
