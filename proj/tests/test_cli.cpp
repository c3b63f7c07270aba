#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "ifl/io.hpp"
#include "ifl/rational.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kData = IFL_TEST_DATA;
const fs::path kGolden = kData / "golden";
const fs::path kManifest = kData / "fixture" / "manifest.json";

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct ScratchDir {
  fs::path path = fs::temp_directory_path() / ("ifl_cli_" + std::to_string(::getpid()));
  ScratchDir() { fs::create_directories(path); }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

fs::path scratch() {
  static const ScratchDir dir;
  return dir.path;
}

std::string quote(const std::string& s) {
  std::string out = "'";
  for (const char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

Run run(const std::vector<std::string>& args) {
  std::string cmd = quote(IFL_CLI);
  for (const auto& a : args) cmd += " " + quote(a);
  const fs::path err = scratch() / "stderr.txt";
  cmd += " 2>" + quote(err.string());
  Run r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err);
  return r;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string l;
  while (std::getline(ss, l)) out.push_back(l);
  return out;
}

const std::string kTiny = R"({"p_d":1,"c":2,"t_d":2,"t_r":2,"n_d":1,"n_r":1})";

}  // namespace

TEST_CASE("closed-form") {
  const Run r = run({"closed-form", "--zeta", "constant:0.9"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["acc"].get<double>() == doctest::Approx(0.84471).epsilon(1e-4));
  CHECK(j["c_d"] == 7);
  CHECK(j["c_r"] == 3);
  double total = j["q1"].get<double>() + j["q3"].get<double>();
  for (const auto& v : j["q2"]) total += v.get<double>();
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(j["diff"].get<double>() == j["acc"].get<double>() - j["agr"].get<double>());

  CHECK(json::parse(run({"closed-form", "--params", kTiny}).out)["acc"] == 0.75);

  const Run odd = run({"closed-form", "--params", R"({"c":21})"});
  CHECK(odd.code == 2);
  CHECK(odd.err.find("c must be even") != std::string::npos);
  const Run field = run({"closed-form", "--params", R"({"t_r":"many"})"});
  CHECK(field.code == 2);
  CHECK(field.err.find("t_r") != std::string::npos);
  CHECK(run({"closed-form", "--params", "{oops"}).code == 2);
  CHECK(run({"closed-form", "--params", (scratch() / "missing.json").string()}).code == 2);
  CHECK(run({"closed-form", "--zeta", "constant:0.2"}).code == 2);
  CHECK(run({"no-such-command"}).code == 2);
}

TEST_CASE("simulate") {
  const std::vector<std::string> args{"simulate", "--samples", "20000", "--seed", "5"};
  const Run a = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == run(args).out);
  auto threaded = args;
  threaded.insert(threaded.end(), {"--threads", "3"});
  CHECK(a.out == run(threaded).out);
  const json j = json::parse(a.out);
  for (const char* key : {"accuracy", "agreement"}) {
    const json& e = j[key];
    CHECK(e["delta"].get<double>() == e["mean"].get<double>() - e["closed_form"].get<double>());
    CHECK(e["n"] == 20000);
  }

  const json full = json::parse(run({"simulate"}).out);
  for (const char* key : {"accuracy", "agreement"}) {
    CHECK(std::abs(full[key]["delta"].get<double>()) <= 3.0 * full[key]["stderr"].get<double>());
  }
  CHECK(run({"simulate", "--mode", "exact"}).code == 2);
}

TEST_CASE("enumerate") {
  const Run r = run({"enumerate", "--params", kTiny});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["acc"] == "3/4");
  const json closed = json::parse(run({"closed-form", "--params", kTiny}).out);
  CHECK(ifl::to_double(ifl::Rational(j["agr"].get<std::string>())) ==
        doctest::Approx(closed["agr"].get<double>()).epsilon(1e-12));

  const std::string mid = R"({"p_d":0.6,"c":4,"t_d":4,"t_r":5,"n_d":2,"n_r":2})";
  const json e = json::parse(run({"enumerate", "--params", mid, "--zeta", "step:1:0.75"}).out);
  const json c = json::parse(run({"closed-form", "--params", mid, "--zeta", "step:1:0.75"}).out);
  CHECK(ifl::to_double(ifl::Rational(e["acc"].get<std::string>())) ==
        doctest::Approx(c["acc"].get<double>()).epsilon(1e-12));
  CHECK(ifl::to_double(ifl::Rational(e["agr"].get<std::string>())) ==
        doctest::Approx(c["agr"].get<double>()).epsilon(1e-12));

  const Run big = run({"enumerate"});
  CHECK(big.code == 3);
  CHECK(big.err.find("enumeration size") != std::string::npos);
}

TEST_CASE("sweep and coverage") {
  const fs::path out = scratch() / "coupled.csv";
  const Run r = run({"sweep", "--vary", "t_r", "--grid", "60:300:20", "--couple", "0.2", "--out", out.string()});
  REQUIRE(r.code == 0);
  const auto rows = lines(slurp(out));
  REQUIRE(rows.size() == 14);
  CHECK(rows[0] == "param,t_d,acc,agr,diff,skipped,reason");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const long tr = 60 + 20 * static_cast<long>(i - 1);
    CHECK(rows[i].rfind(std::to_string(tr) + "," + std::to_string(tr / 5) + ",", 0) == 0);
  }
  const json side = json::parse(slurp(scratch() / "coupled.params.json"));
  CHECK(side.size() == 13);
  CHECK(side[6]["t_d"] == 36);
  CHECK(side[6]["zeta"] == "constant:0.9");

  const Run beta = run({"sweep", "--vary", "beta", "--grid", "0:1:0.05"});
  REQUIRE(beta.code == 0);
  const auto b = lines(beta.out);
  REQUIRE(b.size() == 22);
  double prev = 0.0;
  for (std::size_t i = 1; i < b.size(); ++i) {
    const double v = std::stod(b[i].substr(b[i].find(',') + 1));
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(b[1] == "0,0.5");
  CHECK(b.back() == "1,1");
  CHECK(run({"coverage"}).out == beta.out);

  const Run zeta = run({"sweep", "--vary", "c", "--grid", "20", "--zeta-family", "constant", "--eta-grid",
                        "0.5:0.95:0.05"});
  CHECK(lines(zeta.out).size() == 11);

  const Run missing = run({"sweep", "--grid", "1:2:1"});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("--vary") != std::string::npos);
  CHECK(run({"sweep", "--vary", "c", "--couple", "0.2"}).code == 2);
  CHECK(run({"sweep", "--vary", "t_r", "--grid", "3:1:1"}).code == 2);
}

TEST_CASE("tensor build matches the golden file") {
  const std::string golden = slurp(kGolden / "omega.itns");
  for (const char* threads : {"1", "4"}) {
    const fs::path out = scratch() / (std::string("omega_") + threads + ".itns");
    const Run r = run({"tensor", "build", "--manifest", kManifest.string(), "--out", out.string(), "--threads",
                       threads});
    REQUIRE(r.code == 0);
    CHECK(slurp(out) == golden);
    const json meta = json::parse(r.out);
    CHECK(meta["clusters"] == 4);
    CHECK(meta["cluster_sizes"] == json::array({3, 3, 3, 3}));
    CHECK(meta["pcs"] == 4);
    CHECK(meta["models"] == json::array({"m0", "m1", "m2"}));
  }
}

TEST_CASE("tensor build edge cases") {
  const fs::path dir = scratch() / "twins";
  fs::create_directories(dir);
  const fs::path src = kData / "fixture" / "m1.actv";
  fs::copy_file(src, dir / "a.actv", fs::copy_options::overwrite_existing);
  fs::copy_file(src, dir / "b.actv", fs::copy_options::overwrite_existing);
  std::ofstream(dir / "manifest.json")
      << R"({"models":[{"id":"a","activations":"a.actv"},{"id":"b","activations":"b.actv"}],"pcs":5})";
  const Run twins = run({"tensor", "build", "--manifest", (dir / "manifest.json").string(), "--out",
                         (dir / "o.itns").string()});
  REQUIRE(twins.code == 0);
  CHECK(json::parse(twins.out)["clusters"] == 5);

  std::string bytes = slurp(src);
  bytes[0] = 'X';
  std::ofstream(dir / "b.actv", std::ios::binary) << bytes;
  const Run bad = run({"tensor", "build", "--manifest", (dir / "manifest.json").string(), "--out",
                       (dir / "o.itns").string()});
  CHECK(bad.code == 4);
  CHECK(bad.err.find("bad ACTV header") != std::string::npos);

  fs::remove(dir / "b.actv");
  CHECK(run({"tensor", "build", "--manifest", (dir / "manifest.json").string(), "--out",
             (dir / "o.itns").string()})
            .code == 2);
  CHECK(run({"tensor", "build", "--out", (dir / "o.itns").string()}).code == 2);
}

TEST_CASE("tensor analyze matches the golden reports") {
  const std::string omega = (kGolden / "omega.itns").string();
  const std::string manifest = kManifest.string();
  const std::vector<std::pair<std::string, std::vector<std::string>>> cases{
      {"o1.csv", {"--report", "o1"}},
      {"o2.csv", {"--report", "o2", "--manifest", manifest}},
      {"o2_density.csv", {"--report", "o2", "--density", "--manifest", manifest}},
      {"o3.csv", {"--report", "o3"}},
      {"o4.csv", {"--report", "o4", "--manifest", manifest}},
      {"o4_joint.csv", {"--report", "o4", "--mistake-mode", "joint", "--manifest", manifest}},
      {"perclass.csv", {"--report", "perclass", "--manifest", manifest}},
  };
  for (const auto& [golden, extra] : cases) {
    std::vector<std::string> args{"tensor", "analyze", "--tensor", omega};
    args.insert(args.end(), extra.begin(), extra.end());
    const Run r = run(args);
    CAPTURE(golden);
    CHECK(r.code == 0);
    CHECK(r.out == slurp(kGolden / golden));
  }
  const fs::path fixture = kData / "fixture";
  const Run explicit_files = run({"tensor", "analyze", "--tensor", omega, "--report", "o4", "--predictions",
                                  (fixture / "m0.pred").string() + "," + (fixture / "m1.pred").string() + "," +
                                      (fixture / "m2.pred").string(),
                                  "--labels", (fixture / "labels.pred").string()});
  CHECK(explicit_files.out == slurp(kGolden / "o4.csv"));

  CHECK(run({"neighbors", "--tensor", omega, "--index", "3", "--top", "3"}).out ==
        slurp(kGolden / "neighbors.csv"));
  const Run nb = run({"tensor", "analyze", "--tensor", omega, "--report", "neighbors", "--index", "0", "--top", "3"});
  CHECK(lines(nb.out).size() == 4 + 3);  // header, 3 rows, #query, warning block

  const Run o4 = run({"tensor", "analyze", "--tensor", omega, "--report", "o4"});
  CHECK(o4.code == 2);
  CHECK(run({"tensor", "analyze", "--tensor", omega, "--report", "o9"}).code == 2);
  CHECK(run({"neighbors", "--tensor", omega, "--index", "48"}).code == 2);

  std::string bytes = slurp(kGolden / "omega.itns");
  bytes.resize(bytes.size() - 5);
  const fs::path cut = scratch() / "cut.itns";
  std::ofstream(cut, std::ios::binary) << bytes;
  CHECK(run({"tensor", "analyze", "--tensor", cut.string(), "--report", "o1"}).code == 4);
}
