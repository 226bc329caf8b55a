#include <stdio.h>
#include "tempered_nqs.h"

int main(void) {
    TnqsSpectrum *spectrum = NULL;
    if (tnqs_precipice_spectrum(32, 0.8, 2, &spectrum) != TNQS_STATUS_OK) {
        fprintf(stderr, "error: %s\n", tnqs_last_error());
        return 1;
    }
    size_t levels = 0;
    tnqs_spectrum_len(spectrum, &levels);
    for (size_t i = 0; i < levels; ++i) {
        double e = 0.0;
        tnqs_spectrum_eigenvalue(spectrum, i, &e);
        printf("E%zu = %.12f\n", i, e);
    }
    tnqs_spectrum_free(spectrum);
    return 0;
}
