#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "grushin/config.hpp"
#include "grushin/errors.hpp"
#include "grushin/io.hpp"
#include "grushin/rng.hpp"
#include "grushin/runner.hpp"

using namespace grushin;
using nlohmann::json;

namespace {

std::string tmp_dir(const std::string& tag) {
    const auto p = std::filesystem::temp_directory_path() / ("grushin_test_" + tag);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p.string();
}

// small but complete sweep configuration
std::string small_sweep_config(const std::string& out_dir) {
    json j;
    (void)out_dir;
    j["discretization"] = {{"n_cells", 256}, {"dt", 1e-3}, {"N_max", 4}, {"n_y_quad", 16}};
    j["protocol"] = {{"T", 0.4}, {"T1", 0.1}, {"t1", 0.02}, {"K1", 1e-12}};
    j["coefficient"] = {{"b", {{"type", "bump"}, {"center", 0.6}, {"width", 0.2}, {"amplitude", 0.5}}},
                        {"b_tilde", {{"type", "constant"}, {"value", 1.0}}}};
    j["initial_data"] = {{"modes",
                          {{{"n", 1},
                            {"scale", 1.0},
                            {"profile",
                             {{"type", "bump"}, {"center", 0.6}, {"width", 0.55}, {"amplitude", 1.0}}}},
                           {{"n", 2},
                            {"scale", 0.5},
                            {"profile",
                             {{"type", "bump"}, {"center", 0.6}, {"width", 0.55}, {"amplitude", 1.0}}}}}}};
    j["ensemble"] = {{"count", 4}, {"master_seed", 777}, {"jitter", 0.05}};
    j["sweeps"] = {{"N_list", {1, 2}}};
    return j.dump();
}

} // namespace

TEST_CASE("an empty document resolves to the defaults") {
    const ExperimentConfig cfg = parse_config_text("{}");
    CHECK(cfg.geometry.x_min == -1.0);
    CHECK(cfg.geometry.support.hi == 0.9);
    CHECK(cfg.discretization.n_cells == 512);
    CHECK(cfg.physics.gamma == 0.5);
    CHECK(cfg.protocol.scheme == Scheme::CrankNicolson);
    CHECK(cfg.initial_modes.size() == 1);

    // the resolved echo parses back to an identical document
    const std::string echoed = resolved_config_json(cfg);
    const ExperimentConfig back = parse_config_text(echoed);
    CHECK(resolved_config_json(back) == echoed);
}

TEST_CASE("protocol ordering violations are reported") {
    CHECK_THROWS_WITH_AS(parse_config_text(R"({"protocol": {"t1": 0.3, "T1": 0.2}})"),
                         doctest::Contains("protocol ordering"), ConfigError);
}

TEST_CASE("gamma outside (0,1] is reported") {
    CHECK_THROWS_WITH_AS(parse_config_text(R"({"physics": {"gamma": 1.5}})"),
                         doctest::Contains("gamma out of (0,1]"), ConfigError);
}

TEST_CASE("unknown keys are rejected and all violations are listed") {
    try {
        parse_config_text(R"({"physics": {"gamma": 1.5, "bogus": 1}, "extra_section": {}})");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("bogus") != std::string::npos);
        CHECK(msg.find("extra_section") != std::string::npos);
        CHECK(msg.find("gamma out of (0,1]") != std::string::npos);
        CHECK(msg.find("3 violation(s)") != std::string::npos);
    }
}

TEST_CASE("counter rng is reproducible and run streams are decorrelated") {
    CounterRng a(9), b(9);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    CounterRng r0 = CounterRng::for_run(123, 0);
    CounterRng r1 = CounterRng::for_run(123, 1);
    int agree = 0;
    for (int i = 0; i < 64; ++i) agree += (r0.next_u64() == r1.next_u64());
    CHECK(agree == 0);
}

TEST_CASE("noise injection statistics") {
    std::vector<double> data(20000, 2.0);

    SUBCASE("level zero is the identity") {
        const auto out = noise_inject(data, 0.0, 99);
        CHECK(out == data);
    }
    SUBCASE("sample standard deviation tracks level * RMS") {
        const auto out = noise_inject(data, 0.01, 99);
        double mean = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) mean += out[i] - data[i];
        mean /= static_cast<double>(out.size());
        double var = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double d = out[i] - data[i] - mean;
            var += d * d;
        }
        var /= static_cast<double>(out.size());
        CHECK(std::sqrt(var) == doctest::Approx(0.02).epsilon(0.10));
    }
    SUBCASE("different seeds decorrelate") {
        const auto a = noise_inject(data, 0.01, 1);
        const auto b = noise_inject(data, 0.01, 2);
        double num = 0.0, da = 0.0, db = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double xa = a[i] - data[i], xb = b[i] - data[i];
            num += xa * xb;
            da += xa * xa;
            db += xb * xb;
        }
        CHECK(std::abs(num / std::sqrt(da * db)) < 0.05);
    }
}

TEST_CASE("fnv1a64 is stable") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64_hex("a") != fnv1a64_hex("b"));
}

TEST_CASE("check-class on a zero datum reports a verdict, not an error") {
    const std::string out = tmp_dir("class_zero");
    json j;
    j["discretization"] = {{"n_cells", 256}, {"N_max", 4}, {"n_y_quad", 16}};
    j["initial_data"] = {{"modes",
                          {{{"n", 1}, {"scale", 0.0}, {"profile", {{"type", "constant"}, {"value", 0.0}}}}}}};
    j["output"] = {{"directory", out}};
    const auto cfg = parse_config_text(j.dump());
    run_command(cfg, Command::CheckClass);

    const json rep = json::parse(read_text_file(out + "/class_membership.json"));
    CHECK_FALSE(rep["member"].get<bool>());
    CHECK(rep["K1_max"].get<double>() == 0.0);
}

TEST_CASE("eigen-scaling writes consistent artifacts and a manifest") {
    const std::string out = tmp_dir("scaling");
    json j;
    j["discretization"] = {{"n_cells", 512}, {"N_max", 8}, {"n_y_quad", 32}};
    j["physics"] = {{"gamma", 1.0}};
    j["coefficient"] = {{"b", {{"type", "constant"}, {"value", 1.0}}}};
    j["sweeps"] = {{"n_lo", 4}, {"n_hi", 8}};
    j["output"] = {{"directory", out}};
    const auto cfg = parse_config_text(j.dump());
    run_command(cfg, Command::EigenScaling);

    const json rep = json::parse(read_text_file(out + "/scaling.json"));
    CHECK(std::abs(rep["slope"].get<double>() - 0.5) < 0.1);

    // every manifest entry hashes to its file content
    const json manifest = json::parse(read_text_file(out + "/manifest.json"));
    CHECK(manifest["command"] == "eigen-scaling");
    for (const auto& art : manifest["artifacts"]) {
        const std::string content = read_text_file(out + "/" + art["path"].get<std::string>());
        CHECK(art["fnv1a64"].get<std::string>() == fnv1a64_hex(content));
        CHECK(art["bytes"].get<std::size_t>() == content.size());
    }
    // resolved config is written beside the outputs
    CHECK(std::filesystem::exists(out + "/resolved_config.json"));
}

TEST_CASE("stability sweep reruns byte-identically with the same seed") {
    const std::string out_a = tmp_dir("sweep_a");
    const std::string out_b = tmp_dir("sweep_b");
    // identical config; only the output location differs
    const auto cfg = parse_config_text(small_sweep_config(""));
    RunOptions ra, rb;
    ra.out_dir = out_a;
    rb.out_dir = out_b;
    run_command(cfg, Command::StabilitySweep, ra);
    run_command(cfg, Command::StabilitySweep, rb);

    CHECK(read_text_file(out_a + "/stability.json") == read_text_file(out_b + "/stability.json"));
    CHECK(read_text_file(out_a + "/stability.csv") == read_text_file(out_b + "/stability.csv"));

    // manifests agree up to the timestamp
    json ma = json::parse(read_text_file(out_a + "/manifest.json"));
    json mb = json::parse(read_text_file(out_b + "/manifest.json"));
    ma.erase("generated_at");
    mb.erase("generated_at");
    CHECK(ma == mb);

    // a different seed changes the jittered ensemble
    RunOptions opts;
    opts.seed = 31337;
    const std::string out_c = tmp_dir("sweep_c");
    opts.out_dir = out_c;
    run_command(cfg, Command::StabilitySweep, opts);
    CHECK(read_text_file(out_a + "/stability.json") != read_text_file(out_c + "/stability.json"));
}

TEST_CASE("stability sweep requires count divisible by the N list") {
    const std::string out = tmp_dir("sweep_bad");
    json j = json::parse(small_sweep_config(out));
    j["ensemble"]["count"] = 3;
    const auto cfg = parse_config_text(j.dump());
    CHECK_THROWS_AS(run_command(cfg, Command::StabilitySweep), ConfigError);
}

TEST_CASE("reconstruct command reports errors and artifacts") {
    const std::string out = tmp_dir("recon");
    json j;
    j["discretization"] = {{"n_cells", 256}, {"dt", 5e-4}, {"N_max", 4}, {"n_y_quad", 16}};
    j["protocol"] = {{"T", 0.3}, {"T1", 0.1}, {"t1", 0.02}, {"N", 2}, {"K1", 1e-12}};
    j["coefficient"] = {{"b", {{"type", "bump"}, {"center", 0.6}, {"width", 0.2}, {"amplitude", 0.5}}},
                        {"b_tilde", {{"type", "constant"}, {"value", 1.0}}}};
    j["initial_data"] = {{"modes",
                          {{{"n", 2},
                            {"scale", 1.0},
                            {"profile",
                             {{"type", "bump"}, {"center", 0.6}, {"width", 0.55}, {"amplitude", 1.0}}}}}}};
    j["sweeps"] = {{"N_list", {1, 2}}};
    j["output"] = {{"directory", out}};
    const auto cfg = parse_config_text(j.dump());
    run_command(cfg, Command::Reconstruct);

    const json rep = json::parse(read_text_file(out + "/reconstruction.json"));
    // same-grid twin: the identity is exact
    CHECK(rep["sup_error"].get<double>() < 1e-8);
    CHECK(std::filesystem::exists(out + "/reconstruction.csv"));
}

TEST_CASE("forward command exports norm histories and trajectories") {
    const std::string out = tmp_dir("forward");
    json j;
    j["discretization"] = {{"n_cells", 128}, {"dt", 1e-3}, {"N_max", 4}, {"n_y_quad", 16}};
    j["protocol"] = {{"T", 0.2}, {"T1", 0.1}, {"t1", 0.02}};
    j["output"] = {{"directory", out}, {"write_trajectories", true}};
    const auto cfg = parse_config_text(j.dump());
    run_command(cfg, Command::Forward);

    const json rep = json::parse(read_text_file(out + "/forward.json"));
    REQUIRE(rep["modes"].size() == 1);
    const auto norms = rep["modes"][0]["l2_norms"].get<std::vector<double>>();
    for (std::size_t i = 0; i + 1 < norms.size(); ++i) CHECK(norms[i + 1] <= norms[i] * (1 + 1e-12));

    const std::string csv = read_text_file(out + "/mode_1.csv");
    CHECK(csv.rfind("t,x,value\n", 0) == 0);
}

TEST_CASE("harnack command records positive ratios and the eigen control") {
    const std::string out = tmp_dir("harnack");
    json j;
    j["discretization"] = {{"n_cells", 256}, {"dt", 1e-4}, {"N_max", 4}, {"n_y_quad", 16}};
    j["protocol"] = {{"T", 0.25}, {"T1", 0.2}, {"t1", 0.05}};
    j["ensemble"] = {{"count", 3}, {"master_seed", 5}};
    j["output"] = {{"directory", out}};
    const auto cfg = parse_config_text(j.dump());
    run_command(cfg, Command::Harnack);

    const json rep = json::parse(read_text_file(out + "/harnack.json"));
    CHECK(rep["min_ratio"].get<double>() > 0.0);
    CHECK(rep["eigen_case"]["rel_err"].get<double>() < 0.01);
    CHECK(rep["runs"].size() == 3);
}

TEST_CASE("command names round-trip") {
    for (const char* name : {"forward", "eigen-scaling", "reconstruct", "stability-sweep",
                             "check-class", "harnack"})
        CHECK(command_to_string(command_from_string(name)) == name);
    CHECK_THROWS_AS(command_from_string("bogus"), ConfigError);
}

#ifdef GRUSHIN_CLI_PATH
TEST_CASE("CLI exit codes") {
    const std::string dir = tmp_dir("cli");
    const std::string good = dir + "/good.json";
    const std::string bad = dir + "/bad.json";
    write_text_file(good, small_sweep_config(""));
    write_text_file(bad, R"({"physics": {"gamma": 2.0}})");

    auto run = [](const std::string& cmd) {
        const int status = std::system(cmd.c_str());
        return WEXITSTATUS(status);
    };
    const std::string exe = GRUSHIN_CLI_PATH;
    CHECK(run(exe + " check-class --config " + good + " --out " + dir + "/out1 >/dev/null 2>&1") == 0);
    CHECK(run(exe + " check-class --config " + bad + " --out " + dir + "/out2 >/dev/null 2>&1") == 2);
    CHECK(run(exe + " check-class --config " + dir + "/missing.json >/dev/null 2>&1") == 4);
}
#endif
