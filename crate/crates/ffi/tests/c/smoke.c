/* Assesses one ink file through the C API and prints one line per metric. */
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "kwb.h"

static const char *METRICS[] = {
    "stroke_match", "stroke_valid", "stroke_exist", "stroke_order", "stroke_direction",
    "stroke_edit", "stroke_length", "stroke_closeness", "stroke_speed", "symbol_speed",
};

static char *slurp(const char *path) {
    FILE *f = fopen(path, "rb");
    if (!f) return NULL;
    fseek(f, 0, SEEK_END);
    long n = ftell(f);
    fseek(f, 0, SEEK_SET);
    char *buf = malloc((size_t)n + 1);
    if (fread(buf, 1, (size_t)n, f) != (size_t)n) {
        fclose(f);
        free(buf);
        return NULL;
    }
    buf[n] = '\0';
    fclose(f);
    return buf;
}

int main(int argc, char **argv) {
    if (argc != 3) {
        fprintf(stderr, "usage: smoke STORE INK\n");
        return 64;
    }
    KwbStore *store = NULL;
    if (kwb_store_open(argv[1], &store) != KWB_STATUS_OK) {
        fprintf(stderr, "store: %s\n", kwb_last_error());
        return 1;
    }
    char *ink = slurp(argv[2]);
    if (!ink) return 1;

    KwbReport *report = NULL;
    KwbStatus st = kwb_assess(store, NULL, ink, &report);
    if (st != KWB_STATUS_OK) {
        printf("status %d: %s\n", (int)st, kwb_last_error());
    } else {
        for (size_t i = 0; i < sizeof METRICS / sizeof *METRICS; i++) {
            uint8_t stars = 0;
            double raw = 0;
            bool present = false;
            kwb_report_stars(report, METRICS[i], &stars);
            kwb_report_raw(report, METRICS[i], &raw, &present);
            printf("%s %u %d\n", METRICS[i], stars, present);
        }
        char *json = kwb_report_to_json(report);
        printf("json %zu\n", strlen(json));
        kwb_string_free(json);
    }
    kwb_report_free(report);
    kwb_store_free(store);
    free(ink);
    return 0;
}
