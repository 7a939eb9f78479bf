#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>

#include "asymptolab/experiments.hpp"
#include "asymptolab/plot.hpp"

using namespace asymptolab;
namespace fs = std::filesystem;

namespace {

nlohmann::json base_config() {
    return nlohmann::json::parse(R"({
      "schema_version": 1,
      "name": "t",
      "scenario": "rate_table_k",
      "physics": {"n": 1, "p": 2.2, "f": "abs_power_signed", "a": [1.0],
                  "initial": {"kind": "gaussian", "mass": 2.0, "width": 1.0}},
      "numerics": {"grid": {"half_width": 160.0, "points": 1024}, "t_end": 256},
      "analysis": {"k": 1, "q_list": [1, "inf"], "fit_window": [16, 256]}
    })");
}

nlohmann::json burgers_config(double mass) {
    auto d = base_config();
    d["scenario"] = "burgers_wave";
    d["physics"]["p"] = 2;
    d["physics"]["f"] = "integer_power";
    d["physics"]["initial"]["mass"] = mass;
    d["numerics"]["grid"] = {{"half_width", 200.0}, {"points", 2048}};
    d["numerics"]["t_end"] = 64;
    d["analysis"].erase("fit_window");
    return d;
}

std::string config_error(const nlohmann::json& d) {
    try {
        (void)parse_config(d);
    } catch (const ConfigInvalid& e) {
        return e.what();
    }
    return "";
}

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("asymptolab_test_cli_" + name);
    fs::remove_all(p);
    return p;
}

fs::path run_into(const nlohmann::json& d, const std::string& name) {
    const auto dir = scratch(name);
    const auto c = parse_config(d);
    write_run(c, run_experiment(c), dir, utc_timestamp());
    return dir;
}

int cli(const std::string& args) {
    const int status = std::system((std::string(ASYMPTOLAB_CLI) + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, ParsesDefaultsAndInfinity) {
    const auto c = parse_config(base_config());
    EXPECT_EQ(c.scenario, Scenario::RateTable);
    ASSERT_EQ(c.q_list.size(), 2u);
    EXPECT_TRUE(std::isinf(c.q_list[1]));
    EXPECT_EQ(c.output_dir, "runs/t");
    EXPECT_EQ(c.nodes_per_panel, 8);
}

TEST(Config, MissingExponentNamesP) {
    auto d = base_config();
    d["physics"].erase("p");
    EXPECT_NE(config_error(d).find("\"p\""), std::string::npos);
}

TEST(Config, FieldLevelMessages) {
    auto d = base_config();
    d["scenario"] = "nope";
    EXPECT_NE(config_error(d).find("scenario"), std::string::npos);
    d = base_config();
    d["schema_version"] = 2;
    EXPECT_NE(config_error(d).find("schema_version"), std::string::npos);
    d = base_config();
    d["analysis"]["q_list"] = {1, 0.5};
    EXPECT_NE(config_error(d).find("q_list"), std::string::npos);
    d = base_config();
    d["numerics"]["grid"]["points"] = 1000;
    EXPECT_NE(config_error(d).find("grid"), std::string::npos);
    d = base_config();
    d["numerics"]["t_end"] = 300;
    EXPECT_NE(config_error(d).find("t_end"), std::string::npos);
    d = base_config();
    d["analysis"]["fit_window"] = {16, 1024};
    EXPECT_NE(config_error(d).find("fit_window"), std::string::npos);
}

TEST(Config, ScenarioCompatibility) {
    auto d = base_config();
    d["scenario"] = "optimality_T2.5";
    d["physics"]["f"] = "abs_power";
    EXPECT_NE(config_error(d).find("\"f\""), std::string::npos);
    d = base_config();
    d["scenario"] = "nonoptimality_T2.6";
    EXPECT_NE(config_error(d).find("\"p\""), std::string::npos);
    d = base_config();
    d["physics"]["p"] = 2.75;
    d["analysis"]["k"] = 2;
    EXPECT_NE(config_error(d).find("\"p\""), std::string::npos);
    d = burgers_config(1.0);
    d["physics"]["f"] = "abs_power_signed";
    EXPECT_NE(config_error(d).find("\"f\""), std::string::npos);
}

TEST(Run, ZeroMassBurgersPassesTrivially) {
    const auto c = parse_config(burgers_config(0.0));
    const auto r = run_experiment(c);
    EXPECT_TRUE(r.pass());
    for (const auto& s : r.sections) EXPECT_EQ(s.values.max_abs(), 0.0);
}

TEST(Run, ManifestListsFilesAndIsDeterministic) {
    const auto a = run_into(burgers_config(1.0), "det_a");
    const auto b = run_into(burgers_config(1.0), "det_b");
    const auto m = load_manifest(a);
    EXPECT_TRUE(m.at("pass").get<bool>());
    std::set<std::string> listed;
    for (const auto& f : m.at("files")) listed.insert(f.at("path").get<std::string>());
    for (const auto& e : fs::recursive_directory_iterator(a)) {
        if (!e.is_regular_file() || e.path().filename() == "manifest.json") continue;
        EXPECT_TRUE(listed.count(fs::relative(e.path(), a).string())) << e.path();
    }
    for (const char* csv : {"remainder.csv", "checks.csv"}) {
        EXPECT_EQ(read_file(a / csv), read_file(b / csv)) << csv;
    }
    std::ofstream(a / "checks.csv", std::ios::app) << "tampered\n";
    EXPECT_THROW(load_manifest(a), MissingData);
}

TEST(Plot, OneGuidePerBranchWithRateLabel) {
    const auto dir = run_into(base_config(), "plot");
    const auto r = plot_run(dir);
    ASSERT_FALSE(r.files.empty());
    EXPECT_EQ(r.files.front(), "remainder.svg");
    const auto svg = read_file(dir / "remainder.svg");
    const std::regex guide("class=\"guide\"");
    EXPECT_EQ(std::distance(std::sregex_iterator(svg.begin(), svg.end(), guide), std::sregex_iterator()), 1);
    EXPECT_NE(svg.find("slope -(k+1)σ = -0.2<"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "section_t4.svg"));
    EXPECT_TRUE(fs::exists(dir / "section_t256.svg"));
}

TEST(Plot, EmptyQListGivesNote) {
    auto d = burgers_config(1.0);
    d["analysis"]["q_list"] = nlohmann::json::array();
    const auto dir = run_into(d, "empty_q");
    const auto r = plot_run(dir);
    ASSERT_EQ(r.notes.size(), 1u);
    EXPECT_FALSE(fs::exists(dir / "remainder.svg"));
}

TEST(Plot, MissingManifestIsMissingData) {
    const auto dir = scratch("nomanifest");
    fs::create_directories(dir);
    EXPECT_THROW(plot_run(dir), MissingData);
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(cli("selftest"), 0);
    const auto dir = scratch("exit");
    fs::create_directories(dir);
    auto d = base_config();
    d["physics"].erase("p");
    std::ofstream(dir / "bad.json") << d.dump();
    EXPECT_EQ(cli("run " + (dir / "bad.json").string()), 2);
    std::ofstream(dir / "broken.json") << "{ not json";
    EXPECT_EQ(cli("run " + (dir / "broken.json").string()), 2);
    EXPECT_EQ(cli("run " + (dir / "absent.json").string()), 2);
    EXPECT_EQ(cli("plot " + (dir / "no_run").string()), 2);
    auto ok = burgers_config(1.0);
    ok["output_dir"] = (dir / "run").string();
    std::ofstream(dir / "ok.json") << ok.dump();
    EXPECT_EQ(cli("run " + (dir / "ok.json").string()), 0);
    EXPECT_EQ(cli("plot " + (dir / "run").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "run" / "remainder.svg"));
}
