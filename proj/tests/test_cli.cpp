#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "qpcocycle/cli.hpp"

using namespace qpc;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / "qpc_cli_test" / name;
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

json config_file(const std::string& name) { return read_json(fs::path(QPC_CONFIG_DIR) / name); }

std::string subcommand_for(const std::string& stem)
{
    if (stem.rfind("le_limit", 0) == 0)
        return "le-limit";
    if (stem.rfind("le_", 0) == 0)
        return "le";
    if (stem.rfind("ladder_", 0) == 0)
        return "ladder";
    if (stem.rfind("example_discontinuity", 0) == 0)
        return "example-discontinuity";
    return stem;
}

int shell(const std::string& cmd)
{
    const int rc = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

} // namespace

TEST(Cli, DiscontinuityResonantValue)
{
    cli::RunOptions opt;
    opt.out = scratch("disc");
    const auto r = cli::run("example-discontinuity", config_file("example_discontinuity.json"), opt);
    ASSERT_EQ(r.exit_code, 0);
    const auto j = read_json(opt.out / "example_discontinuity.json");
    EXPECT_TRUE(j["resonant"].get<bool>());
    for (const auto& row : j["rows"])
        EXPECT_NEAR(row["value"].get<double>(), 1.18881e-3, 1e-6);
    EXPECT_EQ(j["meta"]["version"], std::string(kVersion));
}

TEST(Cli, CsvCarriesStampLine)
{
    cli::RunOptions opt;
    opt.out = scratch("stamp");
    ASSERT_EQ(cli::run("le", config_file("le_constant.json"), opt).exit_code, 0);
    const auto csv = slurp(opt.out / "le.csv");
    const auto hash = read_json(opt.out / "le.json")["meta"]["config_hash"].get<std::string>();
    EXPECT_EQ(csv.rfind("# qpcocycle " + std::string(kVersion) + " config " + hash + "\n", 0), 0u);
    EXPECT_NE(csv.find("\nN,value,excised_mass,stderr\n"), std::string::npos);
}

TEST(Cli, MissingKeyIsSchemaError)
{
    cli::RunOptions opt;
    opt.out = scratch("schema");
    const auto r = cli::run("le", json{{"frequency", {0.5}}}, opt);
    EXPECT_EQ(r.exit_code, 2);
    const auto e = read_json(opt.out / "error.json");
    EXPECT_EQ(e["error"]["kind"], "SchemaError");
    EXPECT_EQ(e["error"]["exit_code"], 2);
}

TEST(Cli, ExperimentMismatchAndUnknownKinds)
{
    cli::RunOptions opt;
    opt.out = scratch("mismatch");
    auto c = config_file("le_constant.json");
    c["experiment"] = "ldt";
    EXPECT_EQ(cli::run("le", c, opt).exit_code, 2);
    auto d = config_file("le_constant.json");
    d["cocycle"]["type"] = "banana";
    EXPECT_EQ(cli::run("le", d, opt).exit_code, 2);
    EXPECT_EQ(cli::run("no-such-experiment", json::object(), opt).exit_code, 2);
}

TEST(Cli, SingularCocycleIsNumericalFailure)
{
    cli::RunOptions opt;
    opt.out = scratch("singular");
    const json c = {{"frequency", {0.5}},
                    {"cocycle", {{"type", "constant"}, {"matrix", {0, 0, 0, 0}}}},
                    {"N_list", {5}}};
    const auto r = cli::run("le", c, opt);
    EXPECT_EQ(r.exit_code, 3);
    EXPECT_EQ(read_json(opt.out / "error.json")["error"]["kind"], "AllSamplesSingular");
}

TEST(Cli, FailedGateIsNumericalFailure)
{
    cli::RunOptions opt;
    opt.out = scratch("gate");
    const json c = {{"frequency", {"golden"}},
                    {"ladder",
                     {{"type", "liouville"}, {"N0", 8192}, {"q0", 8}, {"kappa", 0.2}, {"C", 5.0}, {"rho", 0.5}}}};
    EXPECT_EQ(cli::run("ladder", c, opt).exit_code, 3);
    EXPECT_EQ(read_json(opt.out / "error.json")["error"]["kind"], "GateFailed");
}

TEST(Cli, SeedOverrideReachesEnsemble)
{
    cli::RunOptions a, b;
    a.out = scratch("seed_a");
    b.out = scratch("seed_b");
    b.seed = 7;
    auto c = config_file("ap.json");
    c["ensemble"]["chains"] = 50;
    ASSERT_EQ(cli::run("ap", c, a).exit_code, 0);
    ASSERT_EQ(cli::run("ap", c, b).exit_code, 0);
    const auto ja = read_json(a.out / "ap.json"), jb = read_json(b.out / "ap.json");
    EXPECT_NE(ja["meta"]["config_hash"], jb["meta"]["config_hash"]);
    EXPECT_EQ(jb["seed"], 7);
    EXPECT_NE(slurp(a.out / "ap.csv"), slurp(b.out / "ap.csv"));
}

TEST(Cli, OutputIndependentOfThreadCount)
{
    for (const char* name : {"ldt.json", "le_amo.json", "ladder_liouville.json"}) {
        const std::string stem = fs::path(name).stem().string();
        cli::RunOptions one, four;
        one.out = scratch(stem + "_t1");
        four.out = scratch(stem + "_t4");
        one.threads = 1;
        four.threads = 4;
        const auto r1 = cli::run(subcommand_for(stem), config_file(name), one);
        const auto r4 = cli::run(subcommand_for(stem), config_file(name), four);
        ASSERT_EQ(r1.exit_code, 0) << name;
        ASSERT_EQ(r1.files.size(), r4.files.size());
        for (std::size_t i = 0; i < r1.files.size(); ++i)
            EXPECT_EQ(slurp(r1.files[i]), slurp(r4.files[i])) << r1.files[i];
    }
}

TEST(Cli, ParsesTrigPolyForms)
{
    const auto p = cli::parse_trig_poly(json::parse(R"({"kind":"product","of":[
        {"kind":"cosine","k":[1]},{"kind":"terms","terms":[{"k":[0],"c":2.0},{"k":[2],"c":[0,1]}]}]})"),
                                        1);
    const auto q = TrigPoly::cosine({1}, 1.0) * (TrigPoly::monomial({0}, 2.0) + TrigPoly::monomial({2}, cplx(0, 1)));
    EXPECT_TRUE((p - q).is_zero());
    EXPECT_THROW(cli::parse_trig_poly(json{{"kind", "cosine"}, {"k", {1, 2}}}, 1), cli::SchemaError);
    EXPECT_NEAR(cli::parse_real("golden", "w"), 0.6180339887498949, 1e-16);
    EXPECT_EQ(cli::parse_real(json{{"p", 1}, {"q", 4}}, "w"), 0.25);
}

TEST(Io, JsonFloatsUseSeventeenDigits)
{
    const json j = {{"a", 0.1}, {"b", 1.0}, {"c", 3}, {"d", std::nan("")}, {"e", {1e-300, -2.5}}, {"s", "x\"y"}};
    const auto text = json_text(j, 0);
    EXPECT_NE(text.find("\"a\": 0.10000000000000001"), std::string::npos) << text;
    EXPECT_NE(text.find("\"b\": 1.0"), std::string::npos);
    EXPECT_NE(text.find("\"c\": 3"), std::string::npos);
    EXPECT_NE(text.find("\"d\": null"), std::string::npos);
    const json back = json::parse(text);
    EXPECT_EQ(back["a"].get<double>(), 0.1);
    EXPECT_EQ(back["e"][0].get<double>(), 1e-300);
    EXPECT_EQ(back["s"], "x\"y");
    EXPECT_EQ(format_double(1.0 / 3.0), "0.33333333333333331");
}

// Every shipped config runs through the binary, twice, with identical bytes.
TEST(CliBinary, SampleConfigsRunAndReplay)
{
    for (const auto& entry : fs::directory_iterator(QPC_CONFIG_DIR)) {
        if (entry.path().extension() != ".json")
            continue;
        const std::string stem = entry.path().stem().string();
        const fs::path o1 = scratch("bin_" + stem + "_1"), o2 = scratch("bin_" + stem + "_2");
        const std::string base = std::string(QPC_LAB_PATH) + " " + subcommand_for(stem) + " --config " +
                                 entry.path().string() + " --out ";
        ASSERT_EQ(shell(base + o1.string()), 0) << stem;
        ASSERT_EQ(shell(base + o2.string() + " --threads 2"), 0) << stem;
        for (const auto& f : fs::directory_iterator(o1))
            EXPECT_EQ(slurp(f.path()), slurp(o2 / f.path().filename())) << f.path();
    }
}

TEST(CliBinary, ExitCodes)
{
    const fs::path dir = scratch("bin_exit");
    fs::create_directories(dir);
    std::ofstream(dir / "bad.json") << R"({"frequency": ["golden"]})";
    std::ofstream(dir / "broken.json") << "{ not json";
    const std::string lab = QPC_LAB_PATH;
    EXPECT_EQ(shell(lab + " le --config " + (dir / "bad.json").string() + " --out " + (dir / "o").string()), 2);
    EXPECT_EQ(shell(lab + " le --config " + (dir / "broken.json").string()), 2);
    EXPECT_EQ(shell(lab + " le"), 2);
    EXPECT_EQ(shell(lab + " --help"), 0);
}
