#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() / ("lbm_cli_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }

  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return dir / name;
  }

  Result run(const std::string& args) const {
    const fs::path out = dir / "stdout.txt";
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = std::string(LBMBENCH_PATH) + " " + args + " > " + out.string() +
                            " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
  }
};

const char* kSmallConfig = R"toml(
nx = 16
ny = 16
model = "D2Q37"
collide_mode = "Surrogate(16)"
iterations = 3
warmup_iterations = 1
backend = "synthetic"
sampler_period_ms = 5
)toml";

int line_count(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("probe") {
  Workspace ws;
  const Result r = ws.run("probe --rapl-root " + (ws.dir / "missing").string());
  CHECK(r.code == 0);
  CHECK(r.out.find("package: unavailable, synthetic: available") != std::string::npos);
  CHECK(r.out.find("numa nodes:") != std::string::npos);

  const Result j = ws.run("probe --json --rapl-root " + (ws.dir / "missing").string());
  CHECK(j.code == 0);
  const auto doc = nlohmann::json::parse(j.out);
  CHECK(doc.at("package") == false);
  CHECK(doc.at("synthetic") == true);
  CHECK(doc.at("numa_nodes").size() >= 1);
}

TEST_CASE("run") {
  Workspace ws;
  const auto cfg = ws.write("run.toml", kSmallConfig);
  const auto out = ws.dir / "records.jsonl";
  const Result r = ws.run("run --config " + cfg.string() + " --out " + out.string());
  REQUIRE(r.code == 0);
  const auto record = nlohmann::json::parse(r.out);
  CHECK(record.at("status") == "ok");
  CHECK(record.at("config").at("collide_mode") == "Surrogate(16)");
  CHECK(record.at("kernels").size() == 2);
  CHECK(line_count(slurp(out)) == 1);
  CHECK(ws.run("run --config " + cfg.string() + " --out " + out.string()).code == 0);
  CHECK(line_count(slurp(out)) == 2);
}

TEST_CASE("exit codes and json errors") {
  Workspace ws;
  const auto numa = ws.write("numa.toml", std::string(kSmallConfig) +
                                              "memory_target = \"NumaNode(63)\"\n");
  Result r = ws.run("run --json --config " + numa.string());
  CHECK(r.code == 2);
  const auto err = nlohmann::json::parse(r.err);
  CHECK(err.at("kind") == "capability");
  CHECK(err.at("exit_code") == 2);

  const auto rapl = ws.write("rapl.toml", std::string(kSmallConfig) +
                                              "rapl_root = \"/nonexistent/powercap\"\n");
  std::string text = slurp(rapl);
  text.replace(text.find("\"synthetic\""), 11, "\"rapl\"");
  ws.write("rapl.toml", text);
  CHECK(ws.run("run --config " + rapl.string()).code == 2);

  const auto bad = ws.write("bad.toml", std::string(kSmallConfig) + "threads = 0\n");
  r = ws.run("run --json --config " + bad.string());
  CHECK(r.code == 1);
  CHECK(nlohmann::json::parse(r.err).at("kind") == "invalid");

  const auto syntax = ws.write("syntax.toml", "nx = \n");
  r = ws.run("run --config " + syntax.string());
  CHECK(r.code == 1);
  CHECK(r.err.find("line 1") != std::string::npos);

  CHECK(ws.run("frobnicate").code == 1);
  CHECK(ws.run("").code == 1);
  CHECK(ws.run("report --in x.jsonl --kernel bogus").code == 1);
}

TEST_CASE("sweep then report") {
  Workspace ws;
  const auto cfg = ws.write(
      "sweep.toml", std::string(kSmallConfig) +
                        "layout = [\"AoS\", \"SoA\", \"CSoA(8)\", \"CAoSoA(8)\"]\nthreads = [1, 2]\n");
  const auto out = ws.dir / "sweep.jsonl";
  const Result r = ws.run("sweep --config " + cfg.string() + " --out " + out.string());
  REQUIRE(r.code == 0);
  CHECK(line_count(slurp(out)) == 8);

  const auto csv = ws.dir / "out.csv";
  const auto svg = ws.dir / "out.svg";
  REQUIRE(ws.run("report --in " + out.string() + " --csv " + csv.string()).code == 0);
  CHECK(line_count(slurp(csv)) == 1 + 8 * 2);
  REQUIRE(ws.run("report --in " + out.string() + " --svg " + svg.string() + " --kernel collide")
              .code == 0);
  const std::string chart = slurp(svg);
  CHECK(chart.rfind("<svg", 0) == 0);
  REQUIRE(ws.run("report --in " + out.string() + " --svg " + svg.string() + " --kernel collide")
              .code == 0);
  CHECK(slurp(svg) == chart);

  const Result table = ws.run("report --in " + out.string());
  CHECK(table.code == 0);
  CHECK(line_count(table.out) == 17);

  fs::copy_file(out, ws.dir / "other.jsonl");
  const Result cmp =
      ws.run("report --in " + out.string() + " --in " + (ws.dir / "other.jsonl").string());
  CHECK(cmp.code == 0);
  CHECK(cmp.out.find("1.0000") != std::string::npos);

  std::ofstream(out, std::ios::app) << "{broken\n";
  const Result broken = ws.run("report --in " + out.string() + " --csv " + csv.string());
  CHECK(broken.code == 1);
  CHECK(broken.err.find("line 9") != std::string::npos);
}

TEST_CASE("sweep with an invalid combination still succeeds") {
  Workspace ws;
  const auto cfg = ws.write("sweep.toml", std::string(kSmallConfig) +
                                              "ny = 20\npadding = false\n"
                                              "layout = [\"AoS\", \"CSoA(8)\"]\n");
  std::string text = slurp(cfg);
  text.replace(text.find("ny = 16"), 7, "");
  ws.write("sweep.toml", text);
  const auto out = ws.dir / "sweep.jsonl";
  const Result r = ws.run("sweep --config " + cfg.string() + " --out " + out.string());
  CHECK(r.code == 0);
  const std::string lines = slurp(out);
  CHECK(line_count(lines) == 2);
  CHECK(lines.find("\"status\":\"skipped\"") != std::string::npos);
}

TEST_CASE("validate") {
  Workspace ws;
  const Result r = ws.run("validate");
  CHECK(r.code == 0);
  CHECK(line_count(r.out) == 6);
  CHECK(r.out.find("FAIL") == std::string::npos);
  const Result j = ws.run("validate --json");
  CHECK(j.code == 0);
  CHECK(nlohmann::json::parse(j.out).size() == 6);
}
