#include <stdio.h>
#include <string.h>
#include "adastream.h"

#define CHECK(expr) do { if (!(expr)) { fprintf(stderr, "failed: %s (%s)\n", #expr, ads_last_error() ? ads_last_error() : ""); return 1; } } while (0)

int main(void) {
    AdsInstance *inst = NULL;
    CHECK(ads_instance_generate(ADS_FAMILY_COVERAGE, 3, 2, 2.0, 7, &inst) == ADS_STATUS_OK);
    CHECK(ads_instance_num_items(inst) == 3);

    double opt = 0.0;
    CHECK(ads_optimal_value(inst, &opt) == ADS_STATUS_OK && opt > 0.0);

    AdsProperties props;
    CHECK(ads_check_properties(inst, &props) == ADS_STATUS_OK);
    CHECK(props.adaptive_monotone && props.adaptive_submodular);

    char *report = NULL;
    CHECK(ads_evaluate_json(inst, ADS_POLICY_THRESHOLD_UNIFORM, ADS_V_MODE_GREEDY, 0, &report) == ADS_STATUS_OK);
    CHECK(strstr(report, "\"worst_order\"") != NULL);
    ads_string_free(report);

    AdsInstance *bad = NULL;
    CHECK(ads_instance_from_json("{}", &bad) == ADS_STATUS_MODEL);
    CHECK(bad == NULL && ads_last_error() != NULL);

    ads_instance_free(inst);
    printf("%.6f\n", opt);
    return 0;
}
