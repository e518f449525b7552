#ifndef TUTTISIM_H
#define TUTTISIM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tutti_status {
    TUTTI_OK = 0,
    TUTTI_EINVAL = 1,  /* bad argument or configuration */
    TUTTI_EPARSE = 2,  /* malformed config or trace input */
    TUTTI_ERUNTIME = 3 /* internal failure during simulation */
} tutti_status;

/* Message for the most recent failure on this thread. Valid until the
 * next failing call. */
const char* tutti_last_error(void);

/* Frees strings returned by the char*-returning functions below. */
void tutti_string_free(char* s);

/* --- stateless arithmetic ------------------------------------------- */

/* Mapping-table footprint in bytes for a cache of the given size. */
tutti_status tutti_prp_footprint(uint64_t cache_bytes, uint64_t* out_bytes);
tutti_status tutti_sgl_footprint(uint64_t cache_bytes, uint64_t* out_bytes);

/* Striped object placement: device index for (file ordinal, layer, K/V). */
tutti_status tutti_place_object(int num_devices, uint64_t file_ordinal, int layer,
                                int is_value, int* out_device);

/* NVMe queue provisioning. out_pairs receives n_gpus (start,count) pairs;
 * out_pairs must hold 2*n_gpus ints. */
tutti_status tutti_provision_queues(int n_gpus, int per_gpu, int max_queues, int* out_pairs);

/* Dollar cost per million generated tokens. throughput is tokens/hour. */
tutti_status tutti_cost_per_mtok(double p_gpu, int n_gpu, double p_mem, double s_mem,
                                 double p_ssd, double s_ssd, double throughput,
                                 double* out_cost);

/* --- configuration ---------------------------------------------------- */

typedef struct tutti_config tutti_config;

tutti_config* tutti_config_default(void);
tutti_config* tutti_config_load(const char* path); /* NULL on error */
tutti_status tutti_config_override(tutti_config* cfg, const char* key_eq_value);
char* tutti_config_dump_ini(void); /* the built-in defaults as INI text */
void tutti_config_free(tutti_config* cfg);

/* --- traces ------------------------------------------------------------ */

typedef struct tutti_trace tutti_trace;

tutti_trace* tutti_trace_generate(const tutti_config* cfg); /* from [workload] */
tutti_trace* tutti_trace_load(const char* path);            /* JSONL */
tutti_status tutti_trace_save(const tutti_trace* t, const char* path);
size_t tutti_trace_size(const tutti_trace* t);
void tutti_trace_free(tutti_trace* t);

/* --- simulation --------------------------------------------------------- */

/* Runs one simulation and returns the report as a JSON string. If
 * event_log_path is non-NULL the per-event JSONL trace is written there.
 * Returns NULL on error. */
char* tutti_simulate(const tutti_config* cfg, const tutti_trace* trace,
                     const char* event_log_path);

/* Hit-rate sweep over comma-separated backend names ("tutti,ssd,...").
 * Returns CSV text with a header row, NULL on error. */
char* tutti_sweep(const tutti_config* cfg, const tutti_trace* trace, const char* modes_csv,
                  const double* hit_rates, size_t n_rates);

/* Builds the slack table for cfg and returns it serialized as JSON. */
char* tutti_profile(const tutti_config* cfg);

/* Threaded submission/completion ring micro-benchmark; JSON result. */
char* tutti_bench_ring(int depth, uint64_t ops, int threads, uint64_t seed);

#ifdef __cplusplus
}
#endif

#endif /* TUTTISIM_H */
