/* Compiled as C, not C++, so any C++ leakage in the public header
 * (references, default arguments, name mangling) breaks the build here. */
#include <string.h>

#include "cogkit.h"

int cogkit_c_smoke(void);

int cogkit_c_smoke(void) {
    char* json = NULL;
    cogkit_status st;

    if (cogkit_version() == NULL) return 1;
    if (strlen(cogkit_version()) == 0) return 2;

    st = cogkit_lexsim("abc", "abd", 2, 0.5, &json);
    if (st != COGKIT_OK) return 3;
    if (json == NULL || strlen(json) == 0) return 4;
    cogkit_string_free(json);
    if (strlen(cogkit_last_error()) != 0) return 5;

    if (cogkit_lexsim(NULL, "x", 2, 0.5, NULL) != COGKIT_ERR_INVALID_ARGUMENT)
        return 6;
    if (strlen(cogkit_last_error()) == 0) return 7;

    cogkit_string_free(NULL);
    return 0;
}
