#include <stdio.h>
#include <string.h>
#include "lacunary.h"

#define CHECK(cond) do { if (!(cond)) { fprintf(stderr, "failed: %s (line %d)\n", #cond, __LINE__); return 1; } } while (0)

int main(void) {
    LacunarySequence *seq = NULL;
    CHECK(lacunary_sequence_erdos_fortet(&seq) == LACUNARY_STATUS_OK);

    uint64_t count = 0;
    CHECK(lacunary_count(seq, 10, 1, 2, "1", &count) == LACUNARY_STATUS_OK);
    CHECK(count == 9);

    char *term = NULL;
    CHECK(lacunary_sequence_term(seq, 5, &term) == LACUNARY_STATUS_OK);
    CHECK(strcmp(term, "31") == 0);
    lacunary_string_free(term);

    CHECK(lacunary_sequence_term(seq, 0, &term) == LACUNARY_STATUS_INVALID_PARAMETER);
    CHECK(lacunary_last_error_message() != NULL);

    lacunary_sequence_free(seq);
    printf("%s\n", lacunary_version());
    return 0;
}
