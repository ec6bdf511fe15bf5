// Command-line front end. Talks to the simulator exclusively through the
// C API in spdcsim.h.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spdcsim.h"

namespace {

struct ConfigHandle {
    spdcsim_config* ptr = nullptr;
    ~ConfigHandle() { spdcsim_config_free(ptr); }
};

struct StringHandle {
    char* ptr = nullptr;
    ~StringHandle() { spdcsim_string_free(ptr); }
};

int report_failure(spdcsim_status status) {
    std::fprintf(stderr, "error: %s\n", spdcsim_last_error());
    return static_cast<int>(status);
}

void print_warnings() {
    const char* w = spdcsim_last_warnings();
    if (w != nullptr && w[0] != '\0') {
        std::string text = w;
        std::size_t start = 0;
        while (start < text.size()) {
            std::size_t end = text.find('\n', start);
            if (end == std::string::npos) end = text.size();
            std::fprintf(stderr, "warning: %.*s\n",
                         static_cast<int>(end - start), text.c_str() + start);
            start = end + 1;
        }
    }
}

void print_files(const char* files) {
    if (files == nullptr) return;
    std::string text = files;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        std::printf("wrote %.*s\n", static_cast<int>(end - start),
                    text.c_str() + start);
        start = end + 1;
    }
}

struct CommonOpts {
    std::string config_path;
    std::string model;
    std::string out_prefix;
    std::string grid_order;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path,
                    "Config JSON file (or a metadata sidecar from a "
                    "previous run); built-in defaults when omitted");
    cmd->add_option("--model", opts.model,
                    "Override the model: finite | infinite");
    cmd->add_option("--out", opts.out_prefix, "Override the output prefix");
    cmd->add_option("--grid-order", opts.grid_order,
                    "Override the quadrature order: auto | integer >= 8");
}

spdcsim_status load_config(const CommonOpts& opts, ConfigHandle& handle) {
    spdcsim_status status =
        opts.config_path.empty()
            ? spdcsim_config_default(&handle.ptr)
            : spdcsim_config_parse_file(opts.config_path.c_str(),
                                        &handle.ptr);
    if (status != SPDCSIM_OK) return status;
    if (!opts.model.empty()) {
        status = spdcsim_config_set_model(handle.ptr, opts.model.c_str());
        if (status != SPDCSIM_OK) return status;
    }
    if (!opts.out_prefix.empty()) {
        status =
            spdcsim_config_set_output(handle.ptr, opts.out_prefix.c_str());
        if (status != SPDCSIM_OK) return status;
    }
    if (!opts.grid_order.empty()) {
        status = spdcsim_config_set_grid_order(handle.ptr,
                                               opts.grid_order.c_str());
        if (status != SPDCSIM_OK) return status;
    }
    return SPDCSIM_OK;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Two-photon interference simulator: coincidence-dip curves under "
        "programmable mirror aberrations"};
    app.require_subcommand(0, 1);

    bool print_default = false;
    app.add_flag("--print-default-config", print_default,
                 "Print the built-in scenario config as JSON and exit");

    CommonOpts dip_opts;
    CLI::App* dip = app.add_subcommand(
        "dip", "Compute one coincidence-dip curve (CSV + metadata)");
    add_common(dip, dip_opts);

    CommonOpts sweep_opts;
    std::string sweep_mode;
    std::vector<double> sweep_pv;
    CLI::App* sweep = app.add_subcommand(
        "sweep", "Sweep one aberration mode over amplitudes");
    add_common(sweep, sweep_opts);
    sweep->add_option("--mode", sweep_mode,
                      "Swept Zernike mode as n,m (e.g. 3,1); defaults to the "
                      "config's sweep section");
    sweep->add_option("--pv", sweep_pv,
                      "Peak-to-valley amplitudes in micrometers")
        ->delimiter(',');

    CommonOpts cancel_opts;
    CLI::App* cancel = app.add_subcommand(
        "cancel-test",
        "Run the parity battery: even modes must cancel, odd must distort");
    add_common(cancel, cancel_opts);

    int zt_n = 0;
    int zt_m = 0;
    CLI::App* table = app.add_subcommand(
        "zernike-table", "Print radial polynomial coefficient tables");
    table->add_option("n", zt_n, "Radial order")->required();
    CLI::Option* zt_m_opt =
        table->add_option("m", zt_m, "Azimuthal order (all if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(SPDCSIM_ERR_CONFIG);
    }

    if (print_default) {
        ConfigHandle cfg;
        spdcsim_status status = spdcsim_config_default(&cfg.ptr);
        if (status != SPDCSIM_OK) return report_failure(status);
        StringHandle text;
        status = spdcsim_config_render(cfg.ptr, &text.ptr);
        if (status != SPDCSIM_OK) return report_failure(status);
        std::fputs(text.ptr, stdout);
        return 0;
    }

    if (dip->parsed()) {
        ConfigHandle cfg;
        spdcsim_status status = load_config(dip_opts, cfg);
        if (status != SPDCSIM_OK) return report_failure(status);
        StringHandle files;
        status = spdcsim_run_dip(cfg.ptr, &files.ptr);
        print_warnings();
        if (status != SPDCSIM_OK) return report_failure(status);
        print_files(files.ptr);
        return 0;
    }

    if (sweep->parsed()) {
        ConfigHandle cfg;
        spdcsim_status status = load_config(sweep_opts, cfg);
        if (status != SPDCSIM_OK) return report_failure(status);
        StringHandle files;
        if (!sweep_mode.empty() || !sweep_pv.empty()) {
            int n = 0;
            int m = 0;
            if (std::sscanf(sweep_mode.c_str(), "%d,%d", &n, &m) != 2) {
                std::fprintf(stderr,
                             "error: --mode expects n,m (e.g. 3,1); --mode "
                             "and --pv go together\n");
                return static_cast<int>(SPDCSIM_ERR_CONFIG);
            }
            if (sweep_pv.empty()) {
                std::fprintf(stderr,
                             "error: --pv is required when --mode is given\n");
                return static_cast<int>(SPDCSIM_ERR_CONFIG);
            }
            status = spdcsim_run_sweep(cfg.ptr, n, m, sweep_pv.data(),
                                       sweep_pv.size(), &files.ptr);
        } else if (spdcsim_config_has_sweep(cfg.ptr) != 0) {
            status = spdcsim_run_sweep_embedded(cfg.ptr, &files.ptr);
        } else {
            std::fprintf(stderr,
                         "error: no swept mode: pass --mode n,m --pv ... or "
                         "use a config with a sweep section\n");
            return static_cast<int>(SPDCSIM_ERR_CONFIG);
        }
        print_warnings();
        if (status != SPDCSIM_OK) return report_failure(status);
        print_files(files.ptr);
        return 0;
    }

    if (cancel->parsed()) {
        ConfigHandle cfg;
        spdcsim_status status = load_config(cancel_opts, cfg);
        if (status != SPDCSIM_OK) return report_failure(status);
        StringHandle report;
        status = spdcsim_run_cancel_test(cfg.ptr, &report.ptr);
        print_warnings();
        if (report.ptr != nullptr) std::fputs(report.ptr, stdout);
        if (status != SPDCSIM_OK) {
            std::fprintf(stderr, "error: %s\n", spdcsim_last_error());
            return static_cast<int>(status);
        }
        return 0;
    }

    if (table->parsed()) {
        StringHandle text;
        spdcsim_status status = spdcsim_zernike_table(
            zt_n, zt_m, zt_m_opt->count() == 0 ? 1 : 0, &text.ptr);
        if (status != SPDCSIM_OK) return report_failure(status);
        std::fputs(text.ptr, stdout);
        return 0;
    }

    std::fputs(app.help().c_str(), stdout);
    return 0;
}
