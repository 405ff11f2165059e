#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "support.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(QUADRANT_CLI) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch() {
  static const fs::path d = [] {
    auto p = fs::temp_directory_path() / ("quadrant_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return d;
}

// Every data cell parses as a finite number or is a known label.
void check_finite(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) continue;
    if (header) {
      header = false;
      continue;
    }
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      CHECK(cell.find("nan") == std::string::npos);
      CHECK(cell.find("inf") == std::string::npos);
    }
  }
}

}  // namespace

TEST_CASE("kernel command on the bundled example") {
  const auto csv = scratch() / "kernel.csv";
  const auto r = run("kernel " + testing_support::model_path("nonsym") + " --csv " + csv.string());
  CHECK(r.code == 0);
  CHECK(r.out.find("x1") != std::string::npos);
  CHECK(r.out.find("verdict") != std::string::npos);
  const auto text = slurp(csv);
  CHECK(text.rfind("# quadrant ", 0) == 0);
  CHECK(text.find("hash ") != std::string::npos);
  CHECK(text.find("seed 1") != std::string::npos);
  check_finite(text);
  const auto strict = run("kernel builtin:nonsym --tol 1e-13");
  CHECK(strict.out.find("NoRationalWithin(1000000)") != std::string::npos);
  CHECK(run("kernel builtin:symmetric").out.find("Rational(1,1)") != std::string::npos);
}

TEST_CASE("exit codes") {
  CHECK(run("kernel /nonexistent/file.model").code == 4);
  const auto bad = scratch() / "bad.model";
  std::ofstream(bad) << "k0: 1\ninterior: [[1, 0, -0.5], [0, 1, 1.5]]\nhorizontal: [[[1, 0, 1]]]\n"
                        "vertical: [[[0, 1, 1]]]\ncorner: [[[[1, 1, 1]]]]\n";
  CHECK(run("kernel " + bad.string()).code == 2);
  CHECK(run("validate " + bad.string()).code == 2);
  const auto empty = scratch() / "empty.model";
  std::ofstream(empty) << "";
  CHECK(run("kernel " + empty.string()).code == 2);
  CHECK(run("validate builtin:reference").code == 0);
  CHECK(run("bogus").code == 2);
  CHECK(run("kernel builtin:reference --tol -1").code == 2);
  CHECK(run("kernel builtin:reference --csv /nonexistent/dir/out.csv").code == 4);
}

TEST_CASE("commands are byte-reproducible") {
  const auto targets = scratch() / "targets.csv";
  std::ofstream(targets) << "i,j\n1,1\n2,3\n5,5\n";
  const std::vector<std::string> commands{
      "chains builtin:reference --axis x",
      "simulate builtin:reference --start 2,0 --steps 500 --reps 300 --seed 7 --time tau --time 'T1(2)'",
      "simulate builtin:reference --fluid --steps 500 --reps 50 --seed 3",
      "green builtin:reference --targets " + targets.string() + " --method mc --steps 500 --reps 200 --seed 5",
      "green builtin:reference --targets " + targets.string() + " --method contour --quad 64",
      "spectrum builtin:symmetric --n 3",
  };
  int n = 0;
  for (const auto& cmd : commands) {
    const auto a = scratch() / ("a" + std::to_string(n) + ".csv");
    const auto b = scratch() / ("b" + std::to_string(n) + ".csv");
    ++n;
    const auto ra = run(cmd + " --csv " + a.string());
    const auto rb = run(cmd + " --csv " + b.string());
    CAPTURE(cmd);
    CHECK(ra.code == 0);
    CHECK(ra.out == rb.out);
    CHECK(slurp(a) == slurp(b));
    CHECK(!slurp(a).empty());
    check_finite(slurp(a));
  }
}

TEST_CASE("seed changes Monte Carlo output") {
  const auto a = run("simulate builtin:reference --steps 300 --reps 200 --seed 1");
  const auto b = run("simulate builtin:reference --steps 300 --reps 200 --seed 2");
  CHECK(a.code == 0);
  CHECK(a.out != b.out);
}

TEST_CASE("verify thm2 writes CSV and SVG") {
  const auto csv = scratch() / "thm2.csv", svg = scratch() / "thm2.svg";
  const auto r = run("verify thm2 builtin:reference --csv " + csv.string() + " --svg " + svg.string());
  CHECK(r.code == 0);
  CHECK(r.out.find("pass          yes") != std::string::npos);
  check_finite(slurp(csv));
  const auto s = slurp(svg);
  CHECK(s.rfind("<svg", 0) == 0);
  CHECK(s.find("<path d=\"M") != std::string::npos);
}

TEST_CASE("green command rejects bad targets") {
  const auto t = scratch() / "bad_targets.csv";
  std::ofstream(t) << "1,1\nfoo\n";
  CHECK(run("green builtin:reference --targets " + t.string()).code == 2);
  CHECK(run("green builtin:reference --targets /nonexistent.csv").code == 4);
}
