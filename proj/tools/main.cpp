#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "subkam/commands.hpp"
#include "subkam/config.hpp"

namespace {

// Errors raised before run() starts still leave <out>/error.json behind when --out was parsed.
void write_error_json(const std::string& out_dir, int code, const std::string& reason, const std::string& message)
{
    if (out_dir.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    std::ofstream os(std::filesystem::path(out_dir) / "error.json");
    if (os) os << nlohmann::json{{"reason", reason}, {"exit_code", code}, {"message", message}}.dump(2) << '\n';
}

int fail(subkam::ExitCode code, const std::string& reason, const std::string& message,
         const std::string& out_dir = {})
{
    write_error_json(out_dir, static_cast<int>(code), reason, message);
    std::cerr << "subkam: error reason=" << reason << " exit=" << static_cast<int>(code) << ": " << message << '\n';
    return static_cast<int>(code);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"subkam: KAM reducibility engine for sublinear normal frequencies"};
    app.require_subcommand(1, 1);
    std::string config_path, out_dir;
    std::int64_t seed = -1;
    unsigned threads = 0;
    for (const char* name : {"reduce", "measure", "verify", "sweep"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", out_dir, "output directory")->required();
        sub->add_option("--seed", seed, "overrides params.seed")->check(CLI::NonNegativeNumber);
        sub->add_option("--threads", threads, "worker threads, 0 for all cores");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail(subkam::ExitCode::Config, "config", e.what());
    }

    subkam::RunConfig cfg;
    try {
        cfg = subkam::load_config(config_path);
        cfg.command = subkam::command_from_string(app.get_subcommands().front()->get_name());
    } catch (const subkam::ConfigError& e) {
        for (const auto& v : e.violations) std::cerr << "subkam: violation: " << v << '\n';
        return fail(subkam::ExitCode::Config, "config", e.what(), out_dir);
    } catch (const std::exception& e) {
        const auto c = subkam::classify(e);
        return fail(c.code, c.reason, e.what(), out_dir);
    }

    subkam::RunOptions opts;
    opts.out_dir = out_dir;
    if (seed >= 0) opts.seed = static_cast<std::uint64_t>(seed);
    opts.threads = threads;
    const subkam::RunOutcome res = subkam::run(cfg, opts);
    if (res.code != subkam::ExitCode::Ok) return fail(res.code, res.reason, res.message);
    std::cout << "subkam: " << subkam::to_string(cfg.command) << " ok, summary in "
              << (std::filesystem::path(out_dir) / "summary.json").string() << '\n';
    return 0;
}
