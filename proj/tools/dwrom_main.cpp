// dwrom: dispersive-wave solvers with POD/EIM reduced-order pipelines.
// Subcommands: fom, offline, online, sweep, compare. Each takes a JSON
// config document; a handful of flags override the document fields.
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "dwrom/harness.hpp"

namespace {

using dwrom::json;

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream is(path);
    if (!is) throw dwrom::ConfigError("cannot open config '" + path + "'");
    json doc;
    try {
        is >> doc;
    } catch (const json::parse_error& e) {
        throw dwrom::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    return doc;
}

struct CommonFlags {
    std::string config_path;
    std::string out;
    long seed = -1;
    double tol_pod = -1.0;
    double tol_eim = -1.0;
    int n_rb = -1;
    int n_eim = -1;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "JSON config document");
        cmd->add_option("--out", out, "output directory");
        cmd->add_option("--seed", seed, "RNG seed for parameter draws");
        cmd->add_option("--tol-pod", tol_pod, "POD discarded-energy tolerance");
        cmd->add_option("--tol-eim", tol_eim, "EIM tolerance, relative to the training flux scale");
        cmd->add_option("--nrb", n_rb, "reduced-basis dimension");
        cmd->add_option("--neim", n_eim, "EIM space dimension");
    }

    json merged() const {
        json doc = load_config(config_path);
        if (!out.empty()) doc["out_dir"] = out;
        if (seed >= 0) doc["seed"] = static_cast<uint64_t>(seed);
        if (tol_pod > 0.0) doc["tol_pod"] = tol_pod;
        if (tol_eim > 0.0) doc["tol_eim"] = tol_eim;
        if (n_rb > 0) doc["n_rb"] = n_rb;
        if (n_eim > 0) doc["n_eim"] = n_eim;
        return doc;
    }
};

int finish_run(const dwrom::RunReport& rep) {
    std::cout << rep.to_json().dump(2) << std::endl;
    return rep.ok() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"1D dispersive wave solvers with POD/EIM model reduction"};
    app.require_subcommand(1);

    CommonFlags fom_flags, off_flags, on_flags, sweep_flags, cmp_flags;

    auto* cmd_fom = app.add_subcommand("fom", "run a full-order benchmark simulation");
    fom_flags.attach(cmd_fom);

    auto* cmd_off = app.add_subcommand("offline", "collect snapshots, build POD/EIM artifacts");
    off_flags.attach(cmd_off);

    auto* cmd_on = app.add_subcommand("online", "run a reduced simulation against its FOM");
    on_flags.attach(cmd_on);

    auto* cmd_sweep = app.add_subcommand("sweep", "error map over an (a0, h0) grid");
    sweep_flags.attach(cmd_sweep);

    auto* cmd_cmp = app.add_subcommand("compare", "error/time study over reduced dimensions");
    cmp_flags.attach(cmd_cmp);

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_fom->parsed()) {
            json doc = fom_flags.merged();
            doc["reduction"] = "fom";
            return finish_run(dwrom::run_online(dwrom::run_config_from_json(doc)));
        }
        if (cmd_off->parsed()) {
            const auto cfg = dwrom::run_config_from_json(off_flags.merged());
            std::cout << dwrom::run_offline(cfg).dump(2) << std::endl;
            return 0;
        }
        if (cmd_on->parsed()) {
            return finish_run(dwrom::run_online(dwrom::run_config_from_json(on_flags.merged())));
        }
        if (cmd_sweep->parsed()) {
            const json doc = sweep_flags.merged();
            const auto cfg = dwrom::run_config_from_json(doc);
            dwrom::SweepSpec spec;
            if (doc.contains("sweep")) {
                const json& s = doc.at("sweep");
                spec.a0_lo = s.at("a0_lo").get<double>();
                spec.a0_hi = s.at("a0_hi").get<double>();
                spec.h0_lo = s.at("h0_lo").get<double>();
                spec.h0_hi = s.at("h0_hi").get<double>();
                spec.na = s.value("na", 5);
                spec.nh_cells = s.value("nh", 5);
                if (s.contains("t_end")) spec.t_end = s.at("t_end").get<double>();
            } else {
                throw dwrom::ConfigError("sweep needs a 'sweep' section in the config");
            }
            std::cout << dwrom::run_sweep(cfg, spec).dump(2) << std::endl;
            return 0;
        }
        if (cmd_cmp->parsed()) {
            const json doc = cmp_flags.merged();
            const auto cfg = dwrom::run_config_from_json(doc);
            dwrom::CompareSpec spec;
            if (doc.contains("study")) {
                const json& s = doc.at("study");
                for (const auto& v : s.value("n_rb_list", json::array()))
                    spec.n_rb_list.push_back(v.get<int>());
                for (const auto& v : s.value("tol_eim_list", json::array()))
                    spec.tol_eim_list.push_back(v.get<double>());
                if (s.contains("t_end")) spec.t_end = s.at("t_end").get<double>();
            }
            if (spec.n_rb_list.empty())
                throw dwrom::ConfigError("compare needs study.n_rb_list in the config");
            std::cout << dwrom::run_compare(cfg, spec).dump(2) << std::endl;
            return 0;
        }
    } catch (const dwrom::ConfigError& e) {
        std::cerr << "config error: " << e.what() << std::endl;
        return 3;
    } catch (const dwrom::SimulationError& e) {
        std::cerr << "simulation abort: " << e.what() << std::endl;
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 3;
    }
    return 0;
}
