#include <CLI11.hpp>
#include <dkick/run.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

int fail(int code, const std::string& message, const std::vector<dkick::ConfigIssue>& issues = {}) {
    std::cerr << dkick::error_record(code, message, issues).dump() << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delta-kick cooling and velocity-selection simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", dkick::version);

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    bool print_config = false;

    for (const auto& [k, name] : dkick::experiment_names()) {
        auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", config_path, "key = value config file (defaults when omitted)")
            ->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "RNG seed, overrides the config");
        sub->add_option("--out", out_dir, "output directory, default ./out");
        sub->add_option("--threads", threads, "worker threads, 0 = hardware count");
        sub->add_flag("--print-config", print_config, "print the canonical config and exit");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return fail(dkick::exit_config, e.what());
    }

    auto* sub = app.get_subcommands().front();
    auto kind = *dkick::experiment_from_string(sub->get_name());

    dkick::RunConfig cfg;
    try {
        std::string text = "experiment = " + sub->get_name() + "\n";
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) return fail(dkick::exit_config, "cannot read " + config_path);
            std::ostringstream ss;
            ss << f.rdbuf();
            text = ss.str();
        }
        cfg = dkick::parse_config(text, kind);
    } catch (const dkick::ConfigError& e) {
        return fail(dkick::exit_config, e.what(), e.issues());
    }
    if (sub->count("--seed")) cfg.seed = seed;
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    dkick::set_threads(threads);

    if (print_config) {
        std::cout << dkick::serialize_config(cfg);
        return dkick::exit_ok;
    }

    try {
        auto files = dkick::run(cfg);
        for (const auto& f : files) std::cout << (std::filesystem::path(cfg.output_dir) / f).string() << "\n";
    } catch (const dkick::ConfigError& e) {
        return fail(dkick::exit_config, e.what(), e.issues());
    } catch (const std::exception& e) {
        return fail(dkick::exit_runtime, e.what());
    }
    return dkick::exit_ok;
}
