/* C interface of the locprune change point library. */
#ifndef LOCPRUNE_H
#define LOCPRUNE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LP_API __declspec(dllexport)
#else
#define LP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lp_status {
  LP_OK = 0,
  LP_ERR_INTERNAL = 1,
  LP_ERR_IO = 2,               /* unreadable, unwritable or too short input */
  LP_ERR_CONFIG = 3,           /* configuration failed validation */
  LP_ERR_INVALID_ARGUMENT = 4, /* bad pointer or argument */
  LP_ERR_CAP_EXCEEDED = 5      /* exhaustive search above its size cap */
} lp_status;

typedef struct lp_series lp_series;
typedef struct lp_config lp_config;
typedef struct lp_result lp_result;

/* Message of the last failed call on this thread ("" if none). */
LP_API const char* lp_last_error(void);
LP_API const char* lp_version(void);

/* Series. csv_col = 0 reads one value per line; k >= 1 reads CSV column k. */
LP_API lp_status lp_series_from_array(const double* values, size_t n, lp_series** out);
LP_API lp_status lp_series_from_file(const char* path, int csv_col, lp_series** out);
LP_API size_t lp_series_length(const lp_series* series);
LP_API void lp_series_free(lp_series* series);

/* Configuration: key=value settings, see lp_config_key_* for the key list. */
LP_API lp_status lp_config_new(lp_config** out);
LP_API void lp_config_free(lp_config* config);
LP_API lp_status lp_config_set(lp_config* config, const char* key, const char* value);
/* Effective value; the pointer stays valid until the next call on config. */
LP_API const char* lp_config_get(const lp_config* config, const char* key);
LP_API lp_status lp_config_load_file(lp_config* config, const char* path);
LP_API lp_status lp_config_validate(const lp_config* config);
LP_API size_t lp_config_key_count(void);
LP_API const char* lp_config_key_name(size_t index);
LP_API const char* lp_config_key_default(size_t index);
LP_API const char* lp_config_key_help(size_t index);

/* Detection: candidate generation followed by localised pruning. */
LP_API lp_status lp_detect(const lp_series* series, const lp_config* config, lp_result** out);
LP_API size_t lp_result_changepoint_count(const lp_result* result);
LP_API int64_t lp_result_changepoint(const lp_result* result, size_t index);
LP_API size_t lp_result_candidate_count(const lp_result* result);
LP_API double lp_result_rss(const lp_result* result);
LP_API double lp_result_sc(const lp_result* result);
LP_API double lp_result_candidate_ms(const lp_result* result);
LP_API double lp_result_prune_ms(const lp_result* result);
/* Serialised segmentation JSON / candidate CSV; owned by the result. */
LP_API const char* lp_result_json(const lp_result* result);
LP_API const char* lp_result_candidates_csv(const lp_result* result);
LP_API void lp_result_free(lp_result* result);

/* Commands writing the output paths named in the configuration
   (metrics, summary, histogram, timings, output). */
LP_API lp_status lp_simulate(const lp_config* config);
LP_API lp_status lp_bench(const lp_config* config);
LP_API lp_status lp_generate(const lp_config* config);
/* Runs detect on config "input" and writes "output" / "candidates". */
LP_API lp_status lp_detect_files(const lp_config* config);

#ifdef __cplusplus
}
#endif

#endif
