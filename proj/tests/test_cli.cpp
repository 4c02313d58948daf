#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli/commands.hpp"
#include "cli/csv.hpp"

using nlohmann::json;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ceo-rd");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = ceo_rd::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const std::vector<std::string> kM0 = {"--gamma-x", "1", "--rho-x", "0", "--gamma-z",
                                      "1", "--rho-z", "0", "--ell",   "3"};

std::vector<std::string> with_m0(std::vector<std::string> args) {
  args.insert(args.begin() + 1, kM0.begin(), kM0.end());
  return args;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t eol = text.find("\r\n", pos);
    EXPECT_NE(eol, std::string::npos) << "line without CRLF";
    if (eol == std::string::npos) break;
    std::vector<std::string> row;
    std::stringstream line(text.substr(pos, eol - pos));
    std::string field;
    while (std::getline(line, field, ',')) row.push_back(field);
    if (!text.empty() && text[eol - 1] == ',') row.emplace_back();
    rows.push_back(row);
    pos = eol + 2;
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  ADD_FAILURE() << "no column " << name;
  return 0;
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

TEST(Cli, PointReportsRateAndConditions) {
  const CliRun r = cli(with_m0({"point", "--k", "2", "--dk", "0.75"}));
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["schema_version"], 1);
  EXPECT_NEAR(j["point"]["rate"].get<double>(), 0.346574, 1e-6);
  EXPECT_NEAR(j["point"]["lambda_q"].get<double>(), 2.0, 1e-12);
  EXPECT_EQ(j["point"]["profile"].size(), 2u);
  EXPECT_EQ(j["conditions"]["cond1"]["verdict"], "holds");
  EXPECT_EQ(j["conditions"]["regime"]["regime"], "always");
  EXPECT_EQ(j["units"], "nats");
}

TEST(Cli, BitsDivideRatesByLogTwo) {
  const CliRun r = cli(with_m0({"point", "--k", "2", "--dk", "0.75", "--bits"}));
  ASSERT_EQ(r.code, 0);
  const json j = json::parse(r.out);
  EXPECT_NEAR(j["point"]["rate"].get<double>(), 0.5, 1e-12);
  EXPECT_EQ(j["units"], "bits");
}

TEST(Cli, DomainErrorsExitTwoAndNameTheBound) {
  const CliRun low = cli(with_m0({"point", "--k", "2", "--dk", "0.5"}));
  EXPECT_EQ(low.code, 2);
  EXPECT_NE(low.err.find("d_min^(2)=0.5"), std::string::npos) << low.err;

  const CliRun psd = cli({"point", "--rho-x", "-0.6", "--ell", "3", "--k", "2", "--dk", "0.75"});
  EXPECT_EQ(psd.code, 2);
  EXPECT_NE(psd.err.find("not PSD"), std::string::npos) << psd.err;

  EXPECT_EQ(cli({"point", "--k", "2"}).code, 2);         // missing --dk
  EXPECT_EQ(cli({"point", "--k", "two"}).code, 2);       // parse error
  EXPECT_EQ(cli({"frobnicate"}).code, 2);                // unknown command
  EXPECT_EQ(cli({"simulate", "--n", "1.5"}).code, 2);    // fractional sample count
  EXPECT_EQ(cli({"point", "--dk", "0.75", "--format", "xml"}).code, 2);
}

TEST(Cli, SweepRateStrictlyDecreases) {
  const CliRun r = cli(with_m0({"sweep", "--k", "2", "--steps", "50"}));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 51u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"d_k", "lambda_q", "rate", "d_2", "d_3", "cond1",
                                                "cond2", "rate_matches", "profile_matches"}));
  const std::size_t rc = column(rows[0], "rate");
  for (std::size_t i = 2; i < rows.size(); ++i) {
    EXPECT_LT(std::stod(rows[i][rc]), std::stod(rows[i - 1][rc]));
  }
}

TEST(Cli, SinglePointSweepEqualsPoint) {
  const CliRun sweep = cli(with_m0({"sweep", "--k", "2", "--dk", "0.8", "--format", "csv"}));
  const CliRun point = cli(with_m0({"point", "--k", "2", "--dk", "0.8", "--format", "csv"}));
  ASSERT_EQ(sweep.code, 0);
  EXPECT_EQ(sweep.out, point.out);

  const CliRun grid = cli(with_m0({"sweep", "--k", "2", "--dk-min", "0.8", "--dk-max", "0.9",
                                "--steps", "1"}));
  EXPECT_EQ(grid.out, point.out);
}

TEST(Cli, CsvRoundTripsAtTwelveDigits) {
  const CliRun r = cli(with_m0({"sweep", "--k", "1", "--steps", "7", "--format", "csv"}));
  const CliRun j = cli(with_m0({"sweep", "--k", "1", "--steps", "7", "--format", "json"}));
  ASSERT_EQ(r.code, 0);
  const auto rows = parse_csv(r.out);
  const json doc = json::parse(j.out);
  ASSERT_EQ(doc["rows"].size(), rows.size() - 1);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const json& row = doc["rows"][i - 1];
    for (const char* key : {"d_k", "lambda_q", "rate"}) {
      const double exact = row[key].get<double>();
      const double parsed = std::stod(rows[i][column(rows[0], key)]);
      EXPECT_EQ(ceo_rd::cli::csv_number(parsed), ceo_rd::cli::csv_number(exact));
      EXPECT_NEAR(parsed, exact, 1e-11 * std::abs(exact));
    }
  }
}

TEST(Cli, SweepSkipsInvalidRowsWithWarning) {
  const CliRun r = cli(with_m0({"sweep", "--k", "2", "--dk-min", "0.4", "--dk-max", "0.9",
                             "--steps", "6"}));
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(parse_csv(r.out).size(), 1u + 4u);  // 0.4 and 0.5 are outside the interval
  EXPECT_NE(r.err.find("warning: skipping d_k=0.4"), std::string::npos) << r.err;
}

TEST(Cli, RegionListsProfile) {
  const CliRun r = cli(with_m0({"region", "--k", "1", "--dk", "0.8"}));
  ASSERT_EQ(r.code, 0);
  const auto rows = parse_csv(r.out);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"j", "d_j", "d_min_j"}));
  EXPECT_EQ(rows[1][0], "1");
  EXPECT_EQ(rows[1][1], "0.8");
}

TEST(Cli, ConditionsReport) {
  const CliRun r = cli({"conditions", "--gamma-x", "1", "--rho-x", "-0.1", "--gamma-z", "1",
                     "--rho-z", "0.9", "--ell", "3", "--k", "2", "--dk", "0.6"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["conditions"]["regime"]["regime"], "both-ends");
  EXPECT_EQ(j["conditions"]["cond2"]["verdict"], "n/a");
  EXPECT_TRUE(j["conditions"]["cond2"]["value"].is_null());
}

TEST(Cli, VerifyCertifiesReferenceFixture) {
  const CliRun r = cli(with_m0({"verify", "--k", "2", "--dk", "0.75"}));
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["status"], "certified");
  EXPECT_TRUE(j["valid"].get<bool>());
  EXPECT_EQ(j["program"], "P");
  EXPECT_LE(j["oracle_gap"].get<double>(), 1e-6);
  EXPECT_NEAR(j["multipliers"]["c"].get<double>(), 1.0, 1e-12);
}

TEST(Cli, VerifyReportsFailingConditions) {
  // Both-ends fixture (k = 2 spectrum: X 0.9/1.1, Z 1.9/0.1, S 2.8/1.2) at
  // mu = 1/2, between the roots.
  const double q = 0.5 * 2.8 * 1.2 / (0.5 * 2.8 - 1.2);
  const double d = 0.5 * 0.9 * (1.9 + q) / (2.8 + q) + 0.5 * 1.1 * (0.1 + q) / (1.2 + q);
  const CliRun r = cli({"verify", "--gamma-x", "1", "--rho-x", "-0.1", "--gamma-z", "1", "--rho-z",
                     "0.9", "--ell", "3", "--k", "2", "--dk", fmt_double(d)});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["status"], "conditions fail");
  EXPECT_LT(j["multipliers"]["b1"].get<double>(), 0.0);
  EXPECT_EQ(j["violation"], "multiplier_b1");
}

TEST(Cli, BtCheck) {
  const CliRun r = cli(with_m0({"bt-check", "--k", "3", "--dk", "0.7"}));
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_TRUE(j["all_satisfied"].get<bool>());
  EXPECT_EQ(j["constraints"].size(), 3u);
}

TEST(Cli, SimulateReferenceFixturePasses) {
  const CliRun r = cli(with_m0({"simulate", "--k", "2", "--dk", "0.75", "--n", "1e6", "--seed",
                             "42"}));
  ASSERT_EQ(r.code, 0) << r.out;
  const json j = json::parse(r.out);
  EXPECT_TRUE(j["all_pass"].get<bool>());
  EXPECT_EQ(j["rows"].size(), 2u);
  for (const auto& row : j["rows"]) EXPECT_NEAR(row["analytic"].get<double>(), 0.75, 1e-12);
}

TEST(Cli, SimulateSmallSampleStillPasses) {
  const CliRun r = cli(with_m0({"simulate", "--k", "2", "--dk", "0.75", "--n", "100", "--seed",
                             "42", "--format", "csv"}));
  EXPECT_EQ(r.code, 0) << r.out;
  for (std::size_t i = 1; i < parse_csv(r.out).size(); ++i) {
    EXPECT_EQ(parse_csv(r.out)[i].back(), "true");
  }
}

TEST(Cli, SimulateIsDeterministic) {
  const auto args = with_m0({"simulate", "--k", "1", "--n", "20000", "--seed", "9",
                             "--format", "csv"});
  const CliRun a = cli(args);
  auto threaded = args;
  threaded.insert(threaded.end(), {"--threads", "3"});
  const CliRun b = cli(threaded);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, cli(args).out);
}

TEST(Cli, SeedDefaultsFromEnvironment) {
  const auto base = with_m0({"simulate", "--k", "1", "--n", "5000", "--format", "csv"});
  auto seeded = base;
  seeded.insert(seeded.end(), {"--seed", "1234"});
  const std::string explicit_seed = cli(seeded).out;
  const std::string default_seed = cli(base).out;

  ::setenv("CEO_RD_SEED", "1234", 1);
  const std::string env_seed = cli(base).out;
  ::unsetenv("CEO_RD_SEED");

  EXPECT_EQ(env_seed, explicit_seed);
  EXPECT_NE(default_seed, explicit_seed);
  auto forty_two = base;
  forty_two.insert(forty_two.end(), {"--seed", "42"});
  EXPECT_EQ(default_seed, cli(forty_two).out);
}

TEST(Cli, DecompositionCheck) {
  const CliRun r = cli(with_m0({"decomp-check", "--j", "2", "--lambda-q", "2", "--n", "200000"}));
  ASSERT_EQ(r.code, 0) << r.out;
  const json j = json::parse(r.out);
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_NEAR(j["lambda_w"].get<double>(), 1.0, 1e-15);  // half of min(2, 2)

  const CliRun bad = cli(with_m0({"decomp-check", "--j", "2", "--lambda-w", "2", "--n", "100"}));
  EXPECT_EQ(bad.code, 2);
}

TEST(Cli, ParamsJsonWithFlagOverride) {
  const CliRun a = cli({"point", "--params-json",
                     R"({"gamma_x":1,"rho_x":0,"gamma_z":1,"rho_z":0,"ell":3,"k":2,"dk":0.9})",
                     "--dk", "0.75"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_NEAR(json::parse(a.out)["point"]["d_k"].get<double>(), 0.75, 0.0);

  const CliRun b = cli({"point", "--params-json", R"({"k":2,"dk":0.8,"format":"csv"})"});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(parse_csv(b.out)[1][0], "0.8");

  EXPECT_EQ(cli({"point", "--params-json", R"({"nope":1})"}).code, 2);
  EXPECT_EQ(cli({"point", "--params-json", "{"}).code, 2);
}

TEST(Cli, WritesToOutFile) {
  const std::string path = ::testing::TempDir() + "ceo_rd_cli_out.csv";
  const CliRun r = cli(with_m0({"region", "--k", "2", "--dk", "0.75", "--out", path}));
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  std::ifstream f(path, std::ios::binary);
  const std::string content((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  EXPECT_EQ(content.substr(0, 15), "j,d_j,d_min_j\r\n");
}

TEST(Cli, CsvEscaping) {
  EXPECT_EQ(ceo_rd::cli::csv_escape("plain"), "plain");
  EXPECT_EQ(ceo_rd::cli::csv_escape("a,b"), "\"a,b\"");
  EXPECT_EQ(ceo_rd::cli::csv_escape("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(ceo_rd::cli::csv_number(std::nan("")), "");
  EXPECT_EQ(ceo_rd::cli::csv_number(1.0 / 3.0), "0.333333333333");
}
