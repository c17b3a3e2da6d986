#include <math.h>
#include <stdio.h>
#include "locclab.h"

static int fail(const char *what) {
    char *msg = locclab_last_error_message();
    fprintf(stderr, "%s failed: %s\n", what, msg ? msg : "(none)");
    locclab_string_free(msg);
    return 1;
}

int main(void) {
    LocclabStatePair *pair = NULL;
    double p = 0.0;
    uint64_t n = 0;
    if (locclab_werner_pair(3, &pair) != LOCCLAB_STATUS_OK) return fail("werner_pair");
    if (locclab_helstrom(pair, &p) != LOCCLAB_STATUS_OK) return fail("helstrom");
    if (fabs(p - 1.0) > 1e-10) return fail("helstrom value");
    if (locclab_ppt_upper(pair, &p) != LOCCLAB_STATUS_OK) return fail("ppt_upper");
    if (fabs(p - 0.75) > 1e-5) return fail("ppt value");
    locclab_pair_free(pair);

    if (locclab_min_rounds(0.1, 1.0, &n) != LOCCLAB_STATUS_OK || n != 278) return fail("min_rounds");
    if (locclab_min_rounds(0.1, 2.0, &n) != LOCCLAB_STATUS_DOMAIN) return fail("min_rounds domain");
    char *msg = locclab_last_error_message();
    if (msg == NULL) return 1;
    locclab_string_free(msg);
    if (locclab_helstrom(NULL, &p) != LOCCLAB_STATUS_NULL_POINTER) return fail("null check");
    printf("ok %s\n", locclab_version());
    return 0;
}
