#include "spdcsim.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "scenario.hpp"

namespace {

thread_local std::string g_error;
thread_local std::string g_warnings;

void reset_thread_state() {
    g_error.clear();
    g_warnings.clear();
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out != nullptr) {
        std::memcpy(out, s.c_str(), s.size() + 1);
    }
    return out;
}

void set_warnings(const std::vector<std::string>& warnings) {
    std::string joined;
    for (const std::string& w : warnings) {
        if (!joined.empty()) joined += '\n';
        joined += w;
    }
    g_warnings = joined;
}

spdcsim_status fail_config(const std::string& msg) {
    g_error = msg;
    return SPDCSIM_ERR_CONFIG;
}

template <typename Fn>
spdcsim_status guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const spdc::ConfigError& e) {
        g_error = e.what();
        return SPDCSIM_ERR_CONFIG;
    } catch (const std::exception& e) {
        g_error = e.what();
        return SPDCSIM_ERR_NUMERICAL;
    }
}

}  // namespace

struct spdcsim_config {
    spdc::ScenarioConfig cfg;
};

extern "C" {

const char* spdcsim_version(void) { return "1.0.0"; }

const char* spdcsim_last_error(void) { return g_error.c_str(); }

const char* spdcsim_last_warnings(void) { return g_warnings.c_str(); }

spdcsim_status spdcsim_config_default(spdcsim_config** out) {
    reset_thread_state();
    if (out == nullptr) return fail_config("null output argument");
    *out = new spdcsim_config{spdc::default_config()};
    return SPDCSIM_OK;
}

spdcsim_status spdcsim_config_parse(const char* json_text,
                                    const char* source_name,
                                    spdcsim_config** out) {
    reset_thread_state();
    if (json_text == nullptr || out == nullptr) {
        return fail_config("null argument");
    }
    *out = nullptr;
    return guarded([&] {
        std::string src = source_name != nullptr ? source_name : "config";
        spdc::ScenarioConfig cfg = spdc::parse_config(json_text, src);
        *out = new spdcsim_config{std::move(cfg)};
        return SPDCSIM_OK;
    });
}

spdcsim_status spdcsim_config_parse_file(const char* path,
                                         spdcsim_config** out) {
    reset_thread_state();
    if (path == nullptr || out == nullptr) {
        return fail_config("null argument");
    }
    *out = nullptr;
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        return fail_config(std::string("cannot read config file: ") + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return guarded([&] {
        spdc::ScenarioConfig cfg = spdc::parse_config(buf.str(), path);
        *out = new spdcsim_config{std::move(cfg)};
        return SPDCSIM_OK;
    });
}

void spdcsim_config_free(spdcsim_config* cfg) { delete cfg; }

spdcsim_status spdcsim_config_render(const spdcsim_config* cfg,
                                     char** json_out) {
    reset_thread_state();
    if (cfg == nullptr || json_out == nullptr) {
        return fail_config("null argument");
    }
    return guarded([&] {
        *json_out = dup_string(spdc::render_config_json(cfg->cfg));
        return *json_out != nullptr
                   ? SPDCSIM_OK
                   : fail_config("out of memory");
    });
}

spdcsim_status spdcsim_config_set_model(spdcsim_config* cfg,
                                        const char* model) {
    reset_thread_state();
    if (cfg == nullptr || model == nullptr) {
        return fail_config("null argument");
    }
    std::string m = model;
    if (m == "finite") {
        cfg->cfg.model = spdc::DipModel::FiniteAperture;
    } else if (m == "infinite") {
        cfg->cfg.model = spdc::DipModel::InfiniteAperture;
    } else {
        return fail_config("model must be \"finite\" or \"infinite\", got \"" +
                           m + "\"");
    }
    return SPDCSIM_OK;
}

spdcsim_status spdcsim_config_set_output(spdcsim_config* cfg,
                                         const char* prefix) {
    reset_thread_state();
    if (cfg == nullptr || prefix == nullptr) {
        return fail_config("null argument");
    }
    if (prefix[0] == '\0') {
        return fail_config("output prefix must be nonempty");
    }
    cfg->cfg.output = prefix;
    return SPDCSIM_OK;
}

spdcsim_status spdcsim_config_set_grid_order(spdcsim_config* cfg,
                                             const char* order) {
    reset_thread_state();
    if (cfg == nullptr || order == nullptr) {
        return fail_config("null argument");
    }
    std::string s = order;
    if (s == "auto") {
        cfg->cfg.grid_order = 0;
        return SPDCSIM_OK;
    }
    char* end = nullptr;
    long v = std::strtol(order, &end, 10);
    if (end == order || *end != '\0' || v < 8 || v > 1000000) {
        return fail_config(
            "grid order must be \"auto\" or an integer in [8, 1000000], "
            "got \"" +
            s + "\"");
    }
    cfg->cfg.grid_order = static_cast<int>(v);
    return SPDCSIM_OK;
}

int spdcsim_config_has_sweep(const spdcsim_config* cfg) {
    return cfg != nullptr && cfg->cfg.sweep.has_value() ? 1 : 0;
}

spdcsim_status spdcsim_run_dip(const spdcsim_config* cfg, char** files_out) {
    reset_thread_state();
    if (files_out != nullptr) *files_out = nullptr;
    if (cfg == nullptr) return fail_config("null config");
    return guarded([&] {
        spdc::RunResult res = spdc::run_dip(cfg->cfg);
        set_warnings(res.warnings);
        if (files_out != nullptr) {
            std::string joined;
            for (const std::string& f : res.files) {
                if (!joined.empty()) joined += '\n';
                joined += f;
            }
            *files_out = dup_string(joined);
        }
        return SPDCSIM_OK;
    });
}

static spdcsim_status run_sweep_common(const spdcsim_config* cfg,
                                       const spdc::SweepSpec* spec,
                                       char** files_out) {
    if (files_out != nullptr) *files_out = nullptr;
    if (cfg == nullptr) return fail_config("null config");
    return guarded([&] {
        spdc::RunResult res =
            spec != nullptr
                ? spdc::run_sweep(cfg->cfg, spec->n, spec->m, spec->pv_um)
                : spdc::run_sweep(cfg->cfg);
        set_warnings(res.warnings);
        if (files_out != nullptr) {
            std::string joined;
            for (const std::string& f : res.files) {
                if (!joined.empty()) joined += '\n';
                joined += f;
            }
            *files_out = dup_string(joined);
        }
        return SPDCSIM_OK;
    });
}

spdcsim_status spdcsim_run_sweep(const spdcsim_config* cfg, int n, int m,
                                 const double* pv_um, size_t pv_count,
                                 char** files_out) {
    reset_thread_state();
    if (pv_um == nullptr && pv_count > 0) {
        return fail_config("null pv_um array");
    }
    spdc::SweepSpec spec;
    spec.n = n;
    spec.m = m;
    spec.pv_um.assign(pv_um, pv_um + pv_count);
    return run_sweep_common(cfg, &spec, files_out);
}

spdcsim_status spdcsim_run_sweep_embedded(const spdcsim_config* cfg,
                                          char** files_out) {
    reset_thread_state();
    return run_sweep_common(cfg, nullptr, files_out);
}

spdcsim_status spdcsim_run_cancel_test(const spdcsim_config* cfg,
                                       char** report_out) {
    reset_thread_state();
    if (report_out != nullptr) *report_out = nullptr;
    if (cfg == nullptr) return fail_config("null config");
    spdcsim_status status = SPDCSIM_OK;
    spdcsim_status guard_status = guarded([&] {
        spdc::CancellationOutcome out = spdc::run_cancellation(cfg->cfg);
        set_warnings(out.warnings);
        if (report_out != nullptr) {
            *report_out = dup_string(out.report);
        }
        if (out.failed) {
            std::string modes;
            for (const spdc::CancellationRow& r : out.rows) {
                if (r.verdict == "fail") {
                    if (!modes.empty()) modes += ", ";
                    modes += "(" + std::to_string(r.mode.n) + "," +
                             std::to_string(r.mode.m) + ")";
                }
            }
            g_error = "cancellation battery failed for mode(s) " + modes;
            status = SPDCSIM_ERR_CANCEL;
        }
        return SPDCSIM_OK;
    });
    return guard_status != SPDCSIM_OK ? guard_status : status;
}

spdcsim_status spdcsim_zernike_table(int n, int m, int all_m,
                                     char** text_out) {
    reset_thread_state();
    if (text_out == nullptr) return fail_config("null output argument");
    *text_out = nullptr;
    return guarded([&] {
        std::optional<int> mm;
        if (all_m == 0) mm = m;
        *text_out = dup_string(spdc::zernike_table_text(n, mm));
        return *text_out != nullptr
                   ? SPDCSIM_OK
                   : fail_config("out of memory");
    });
}

void spdcsim_string_free(char* s) { std::free(s); }

}  // extern "C"
