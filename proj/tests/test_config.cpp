#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mzimpact/pipeline.hpp"

using namespace mzimpact;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("mzimpact_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    const fs::path p = dir / "config.json";
    std::ofstream(p) << text;
    return p;
}

} // namespace

TEST(Config, Defaults) {
    const RunConfig c = config_from_json(json{{"model", {{"type", "timoshenko"}}}});
    EXPECT_EQ(c.family.tag, ModelTag::timoshenko);
    EXPECT_EQ(c.size, 20u);
    EXPECT_DOUBLE_EQ(c.family.beta, 4800.0);
    EXPECT_DOUBLE_EQ(c.family.gamma, 0.25);
    EXPECT_DOUBLE_EQ(c.family.damping, 0.1);
    EXPECT_DOUBLE_EQ(c.contact.stop, -0.05);
    EXPECT_DOUBLE_EQ(c.run.eps, 3.5e-5);
    EXPECT_DOUBLE_EQ(c.contact.eps, 3.5e-5);
    EXPECT_EQ(c.forcing.mode, 2u);
    EXPECT_DOUBLE_EQ(c.forcing.amplitude, 30.0);
    EXPECT_DOUBLE_EQ(c.forcing.frequency, 13.0);
    EXPECT_EQ(c.run.max_events, 10'000'000u);
    EXPECT_EQ(config_from_json(json{{"model", {{"type", "string"}}}}).size, 64u);
}

TEST(Config, Rejections) {
    EXPECT_THROW(config_from_json(json::object()), ValidationError);
    EXPECT_THROW(config_from_json(json{{"model", {{"type", "plate"}}}}), ValidationError);
    EXPECT_THROW(config_from_json(json{{"model", {{"type", "string"}}}, {"extra", 1}}), ValidationError);
    EXPECT_THROW(config_from_json(json{{"model", {{"type", "string"}, {"sise", 3}}}}), ValidationError);
    EXPECT_THROW(config_from_json(json{{"model", {{"type", "timoshenko"}, {"size", 6}}}}), ValidationError);
    EXPECT_THROW(config_from_json(json{{"model", {{"type", "string"}}}, {"run", {{"eps", -1.0}}}}), ValidationError);
    EXPECT_THROW(config_from_json(json{{"model", {{"type", "string"}}}, {"run", {{"plateau_method", "median"}}}}),
                 ValidationError);
    EXPECT_THROW(config_from_json(json{{"model", {{"type", "string"}}}, {"contact", {{"restitution", 2.0}}}}),
                 ValidationError);
    EXPECT_THROW(config_from_json(json{{"model", {{"type", "string"}}}, {"regularity", {{"sizes", {64, 32}}}}}),
                 ValidationError);
    EXPECT_THROW(config_from_json(json{{"model", {{"type", "string"}, {"size", 4}}}, {"forcing", {{"mode", 5}}}}),
                 ValidationError);
}

TEST(Config, Overrides) {
    json root{{"model", {{"type", "string"}}}};
    apply_override(root, "run.eps=1e-4");
    apply_override(root, "model.type=euler-bernoulli");
    apply_override(root, "run.plateau_window=[2,20]");
    const RunConfig c = config_from_json(root);
    EXPECT_DOUBLE_EQ(c.run.eps, 1e-4);
    EXPECT_EQ(c.family.tag, ModelTag::euler_bernoulli);
    EXPECT_DOUBLE_EQ(c.run.plateau_begin, 2.0);
    EXPECT_THROW(apply_override(root, "noequals"), ValidationError);
    EXPECT_THROW(apply_override(root, "=3"), ValidationError);
}

TEST(Config, Files) {
    const fs::path d = temp_dir("files");
    EXPECT_THROW(parse_config((d / "missing.json").string()), ValidationError);
    EXPECT_THROW(parse_config(write_config(d, "   \n").string()), ValidationError);
    EXPECT_THROW(parse_config(write_config(d, "{model:").string()), ValidationError);
    EXPECT_THROW(parse_config(write_config(d, "[1,2]").string()), ValidationError);
    const RunConfig c = parse_config(write_config(d, R"({"model":{"type":"string","size":8}})").string(), {"model.size=12"});
    EXPECT_EQ(c.size, 12u);
}

TEST(Outputs, KernelFilesParseAndAreDeterministic) {
    const RunConfig c = config_from_json(
        json{{"model", {{"type", "string"}, {"size", 8}}}, {"run", {{"eps", 1e-3}, {"t_end", 0.5}}}});
    const fs::path a = temp_dir("det_a"), b = temp_dir("det_b");
    run_subcommand("kernel", c, OutputDir(a));
    run_subcommand("kernel", c, OutputDir(b));
    for (const char* f : {"kernel.csv", "kernel_summary.json"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    const json s = json::parse(slurp(a / "kernel_summary.json"));
    EXPECT_TRUE(s.contains("L_plus"));
    EXPECT_TRUE(s.contains("jumps"));
    std::istringstream csv(slurp(a / "kernel.csv"));
    std::string line;
    std::getline(csv, line);
    EXPECT_EQ(line, "tau,L1,L2");
    std::size_t rows = 0;
    while (std::getline(csv, line)) {
        EXPECT_EQ(std::count(line.begin(), line.end(), ','), 2);
        ++rows;
    }
    EXPECT_EQ(rows, 501u);
}

TEST(Outputs, SingleModeKernelIsZero) {
    const RunConfig c = config_from_json(
        json{{"model", {{"type", "string"}, {"size", 1}}}, {"forcing", {{"mode", 0}}}, {"run", {{"eps", 1e-2}, {"t_end", 0.2}}}});
    const fs::path d = temp_dir("m1");
    run_subcommand("kernel", c, OutputDir(d));
    std::istringstream csv(slurp(d / "kernel.csv"));
    std::string line;
    std::getline(csv, line);
    while (std::getline(csv, line)) {
        const auto p = line.find(',');
        EXPECT_EQ(line.substr(p), ",0,0");
    }
}

TEST(Outputs, SimulateAndModesFiles) {
    const RunConfig c = config_from_json(
        json{{"model", {{"type", "string"}, {"size", 16}}}, {"run", {{"eps", 1e-3}, {"t_end", 1.0}}}});
    const fs::path d = temp_dir("sim");
    run_subcommand("simulate", c, OutputDir(d));
    run_subcommand("modes", c, OutputDir(d));
    EXPECT_TRUE(json::accept(slurp(d / "events.json")));
    EXPECT_EQ(slurp(d / "trajectory.csv").substr(0, 22), "t,y1,y2,fc,in_contact\n");
    EXPECT_EQ(slurp(d / "modes.csv").substr(0, 26), "k,omega,damping,tip_value\n");
    EXPECT_THROW(run_subcommand("bogus", c, OutputDir(d)), ValidationError);
}

TEST(Outputs, SingularModelWritesNoTrajectory) {
    const RunConfig c = config_from_json(json{{"model", {{"type", "euler-bernoulli"}, {"size", 25}}}});
    const fs::path d = temp_dir("eb");
    EXPECT_THROW(run_subcommand("simulate", c, OutputDir(d)), SingularModelError);
    EXPECT_FALSE(fs::exists(d / "trajectory.csv"));
}
