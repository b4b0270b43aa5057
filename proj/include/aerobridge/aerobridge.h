#ifndef AEROBRIDGE_AEROBRIDGE_H
#define AEROBRIDGE_AEROBRIDGE_H

/* C interface to the aerobridge simulator.
 *
 * Objects are opaque handles created by ab_*_create/ab_*_run functions and
 * released with the matching ab_*_free. Every call that can fail returns an
 * ab_status; on failure a description is available from
 * ab_last_error_message() on the same thread until the next failing call.
 * Text getters follow the snprintf convention: they write at most `capacity`
 * bytes including the terminator and always report the full length (without
 * terminator) through `length` when it is non-null. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(AEROBRIDGE_BUILDING_LIBRARY)
#    define AB_API __declspec(dllexport)
#  else
#    define AB_API __declspec(dllimport)
#  endif
#else
#  define AB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ab_status {
  AB_OK = 0,
  AB_ERR_INVALID_ARGUMENT = 1,
  AB_ERR_PITCH_SINGULARITY = 2,
  AB_ERR_NON_POSITIVE_GEOMETRY = 3,
  AB_ERR_OUT_OF_RANGE = 4,
  AB_ERR_UNREACHABLE_TARGET = 5,
  AB_ERR_EMPTY_TRACE = 6,
  AB_ERR_BEHIND_CAMERA = 7,
  AB_ERR_DEGENERATE_CORNERS = 8,
  AB_ERR_NUMERICAL_FAILURE = 9,
  AB_ERR_NO_CENTER_MARKER = 10,
  AB_ERR_HEADING_UNDEFINED = 11,
  AB_ERR_NO_FULL_SLOT = 12,
  AB_ERR_STATE_EXPLOSION = 13,
  AB_ERR_STUCK_BATTERY = 14,
  AB_ERR_LATCH_LOST = 15,
  AB_ERR_CONFIG = 16,
  AB_ERR_IO = 17,
  AB_ERR_NULL_HANDLE = 100,
  AB_ERR_INTERNAL = 101
} ab_status;

typedef enum ab_format { AB_FORMAT_CSV = 0, AB_FORMAT_JSON = 1 } ab_format;

typedef enum ab_outcome {
  AB_OUTCOME_TRANSFER_DONE = 0,
  AB_OUTCOME_ABORTED = 1,
  AB_OUTCOME_TIMEOUT = 2,
  AB_OUTCOME_ERROR = 3
} ab_outcome;

typedef enum ab_experiment_kind {
  AB_EXPERIMENT_TRAJECTORIES = 0,
  AB_EXPERIMENT_CMP = 1,
  AB_EXPERIMENT_PROTOCOL = 2
} ab_experiment_kind;

typedef enum ab_artifact {
  AB_ARTIFACT_TRACE = 0,
  AB_ARTIFACT_EVENTS = 1,
  AB_ARTIFACT_OBSERVATIONS = 2,
  AB_ARTIFACT_NAV_LOG = 3,
  AB_ARTIFACT_SUMMARY = 4
} ab_artifact;

typedef struct ab_config ab_config;
typedef struct ab_run ab_run;
typedef struct ab_experiment ab_experiment;

typedef struct ab_run_summary {
  uint64_t seed;
  int success;
  ab_outcome outcome;
  double sim_time;          /* s */
  int has_lock_time;
  double lock_time;         /* s */
  int has_transfer_duration;
  double transfer_duration; /* s, slides open to slides closed */
  double max_displacement;  /* m */
  uint64_t messages_sent;
  uint64_t messages_dropped;
  int batteries_left;
} ab_run_summary;

AB_API const char* ab_version(void);
AB_API const char* ab_status_name(ab_status status);
AB_API const char* ab_last_error_message(void);

/* Configuration */
AB_API ab_status ab_config_create_default(ab_config** out);
AB_API ab_status ab_config_parse(const char* text, ab_config** out);
AB_API ab_status ab_config_load(const char* path, ab_config** out);
AB_API ab_status ab_config_validate(const ab_config* config);
AB_API ab_status ab_config_set_seed(ab_config* config, uint64_t seed);
AB_API ab_status ab_config_get_seed(const ab_config* config, uint64_t* seed);
AB_API ab_status ab_config_serialize(const ab_config* config, char* buffer, size_t capacity,
                                     size_t* length);
AB_API void ab_config_free(ab_config* config);

/* Scenario runs. A run that ends aborted or timed out still returns AB_OK;
 * inspect the summary. Invalid configurations return AB_ERR_CONFIG. */
AB_API ab_status ab_run_scenario(const ab_config* config, ab_run** out);
AB_API ab_status ab_run_get_summary(const ab_run* run, ab_run_summary* out);
AB_API ab_status ab_run_get_reason(const ab_run* run, char* buffer, size_t capacity,
                                   size_t* length);
AB_API ab_status ab_run_get_artifact(const ab_run* run, ab_artifact artifact, ab_format format,
                                     char* buffer, size_t capacity, size_t* length);
AB_API ab_status ab_run_write(const ab_run* run, const char* directory, ab_format format);
AB_API void ab_run_free(ab_run* run);

/* Experiments. iterations <= 0 selects the configured count; the protocol
 * check ignores it. */
AB_API ab_status ab_experiment_run(const ab_config* config, ab_experiment_kind kind,
                                   int iterations, ab_experiment** out);
/* Trajectories: ordering holds. Protocol: nominal passes and the mutant is
 * caught. CMP: every association locked in every iteration. */
AB_API ab_status ab_experiment_passed(const ab_experiment* experiment, int* passed);
AB_API ab_status ab_experiment_get_text(const ab_experiment* experiment, ab_format format,
                                        char* buffer, size_t capacity, size_t* length);
AB_API ab_status ab_experiment_write(const ab_experiment* experiment, const char* directory,
                                     ab_format format);
AB_API void ab_experiment_free(ab_experiment* experiment);

#ifdef __cplusplus
}
#endif

#endif /* AEROBRIDGE_AEROBRIDGE_H */
