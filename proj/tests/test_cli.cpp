#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "stein/sample_set.hpp"

namespace {

const std::string kWorkDir = "/tmp/steinpcg_cli_test";

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args) {
  std::filesystem::create_directories(kWorkDir);
  const std::string out_path = kWorkDir + "/stdout.txt";
  const std::string err_path = kWorkDir + "/stderr.txt";
  const std::string command = std::string(STEINPCG_CLI_PATH) + " " + args + " > " + out_path +
                              " 2> " + err_path;
  const int status = std::system(command.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  return result;
}

std::map<std::string, std::string> parse_report(const std::string& text) {
  std::map<std::string, std::string> fields;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto space = line.find(' ');
    if (space != std::string::npos) fields[line.substr(0, space)] = line.substr(space + 1);
  }
  return fields;
}

// One shared chain output reused by the solve/estimate cases.
const std::string& shared_samples() {
  static const std::string path = [] {
    std::filesystem::create_directories(kWorkDir);
    const std::string file = kWorkDir + "/shared.samples";
    const CliResult r =
        run_cli("sample --d 4 --n-data 150 --iters 300 --seed 9 -o " + file);
    REQUIRE(r.exit_code == 0);
    return file;
  }();
  return path;
}

}  // namespace

TEST_CASE("sample reports distinct count, acceptance and step, and the file round-trips") {
  const std::string file = kWorkDir + "/report.samples";
  std::filesystem::create_directories(kWorkDir);
  const CliResult r = run_cli("sample --d 4 --n-data 150 --iters 300 --seed 9 -o " + file);
  REQUIRE(r.exit_code == 0);
  const auto fields = parse_report(r.out);
  CHECK(fields.at("wrote") == file);
  CHECK(fields.at("iterations") == "300");
  CHECK(fields.at("step") == "0.102");  // tuned d = 4 default
  const double acceptance = std::stod(fields.at("acceptance"));
  CHECK(acceptance > 0.0);
  CHECK(acceptance < 1.0);

  const stein::SampleSet samples = stein::load_samples(file);
  CHECK(std::to_string(samples.size()) == fields.at("distinct"));
  CHECK(samples.provenance().sampler == "rwmh");
}

TEST_CASE("the d=10 step default is the tuned value") {
  const std::string file = kWorkDir + "/d10.samples";
  std::filesystem::create_directories(kWorkDir);
  const CliResult r = run_cli("sample --d 10 --n-data 100 --iters 150 --seed 2 -o " + file);
  REQUIRE(r.exit_code == 0);
  CHECK(parse_report(r.out).at("step") == "0.099");
}

TEST_CASE("sample runs are deterministic in the seed") {
  std::filesystem::create_directories(kWorkDir);
  const std::string first = kWorkDir + "/det_a.samples";
  const std::string second = kWorkDir + "/det_b.samples";
  REQUIRE(run_cli("sample --d 3 --n-data 120 --iters 250 --seed 5 -o " + first).exit_code == 0);
  REQUIRE(run_cli("sample --d 3 --n-data 120 --iters 250 --seed 5 -o " + second).exit_code == 0);
  CHECK(slurp(first) == slurp(second));
  const std::string different = kWorkDir + "/det_c.samples";
  REQUIRE(run_cli("sample --d 3 --n-data 120 --iters 250 --seed 6 -o " + different).exit_code ==
          0);
  CHECK(slurp(first) != slurp(different));
}

TEST_CASE("solve prints a summary and writes the requested trace") {
  const std::string trace = kWorkDir + "/solve_trace.csv";
  const CliResult r = run_cli("solve --samples " + shared_samples() +
                              " --l 0.3 --precond jacobi --b 2 --trace " + trace);
  REQUIRE(r.exit_code == 0);
  const auto fields = parse_report(r.out);
  CHECK(fields.at("preconditioner") == "jacobi(b=2)");
  CHECK(fields.at("reason") == "converged");
  CHECK(fields.count("residual") == 1);
  CHECK(fields.at("trace") == trace);

  const std::string csv = slurp(trace);
  CHECK(csv.rfind("iter,res_norm,sigma,alpha,beta\n", 0) == 0);
  const std::size_t rows = static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n'));
  CHECK(rows == std::stoul(fields.at("iterations")) + 2);  // header + iterates 0..m
}

TEST_CASE("ground-truth solves above the dense limit are usage errors") {
  const CliResult r = run_cli("solve --samples " + shared_samples() +
                              " --criterion ground-truth --dense-limit 50");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("usage error") != std::string::npos);
  CHECK(r.err.find("dense limit") != std::string::npos);
}

TEST_CASE("estimate prints the report and mirrors it into the CSV row") {
  const std::string csv_path = kWorkDir + "/estimate.csv";
  const CliResult r = run_cli("estimate --samples " + shared_samples() +
                              " --integrand coord:1 --l 0.3 --csv " + csv_path);
  REQUIRE(r.exit_code == 0);
  const auto fields = parse_report(r.out);
  CHECK(fields.at("integrand") == "coord:1");
  CHECK(fields.at("reason") == "converged");
  CHECK(fields.at("estimate") != "nan");
  CHECK(fields.at("sigma") != "nan");

  const std::string expected = "integrand,estimate,sigma,iterations,reason\n" +
                               fields.at("integrand") + ',' + fields.at("estimate") + ',' +
                               fields.at("sigma") + ',' + fields.at("iterations") + ',' +
                               fields.at("reason") + '\n';
  CHECK(slurp(csv_path) == expected);
}

TEST_CASE("usage errors exit 2, runtime failures exit 1") {
  CHECK(run_cli("").exit_code == 2);                                   // no subcommand
  CHECK(run_cli("sample --bogus 1 -o /tmp/x.samples").exit_code == 2); // unknown flag
  CHECK(run_cli("sample --iters 10").exit_code == 2);                  // missing required -o
  CHECK(run_cli("estimate --samples " + shared_samples() + " --integrand bogus").exit_code == 2);
  CHECK(run_cli("solve --samples /nonexistent.samples").exit_code == 1);
  CHECK(run_cli("sweep --profile nightly -o /tmp/x.csv").exit_code == 2);
}

TEST_CASE("config files fill defaults and command-line flags win") {
  std::filesystem::create_directories(kWorkDir);
  const std::string config = kWorkDir + "/solve.ini";
  {
    std::ofstream out(config);
    out << "[solve]\n"
        << "samples=" << shared_samples() << "\n"
        << "l=0.3\n"
        << "precond=jacobi\n"
        << "b=2\n";
  }
  const CliResult from_config = run_cli("--config " + config + " solve");
  REQUIRE(from_config.exit_code == 0);
  CHECK(parse_report(from_config.out).at("preconditioner") == "jacobi(b=2)");

  const CliResult overridden = run_cli("--config " + config + " solve --b 3");
  REQUIRE(overridden.exit_code == 0);
  CHECK(parse_report(overridden.out).at("preconditioner") == "jacobi(b=3)");

  const std::string bad = kWorkDir + "/bad.ini";
  {
    std::ofstream out(bad);
    out << "[solve]\nfrobnicate=1\n";
  }
  CHECK(run_cli("--config " + bad + " solve --samples " + shared_samples()).exit_code == 2);
}

TEST_CASE("randomized-preconditioner solves are thread-count invariant") {
  const std::string one = kWorkDir + "/trace_t1.csv";
  const std::string four = kWorkDir + "/trace_t4.csv";
  const std::string common = "solve --samples " + shared_samples() +
                             " --l 0.3 --precond rand-nystrom --n 10 --eta 1" +
                             " --precond-seed 7 --trace ";
  REQUIRE(run_cli("--threads 1 " + common + one).exit_code == 0);
  REQUIRE(run_cli("--threads 4 " + common + four).exit_code == 0);
  CHECK(slurp(one) == slurp(four));
}

TEST_CASE("sweep output is byte-identical across thread counts") {
  const std::string one = kWorkDir + "/sweep_t1.csv";
  const std::string four = kWorkDir + "/sweep_t4.csv";
  const std::string common =
      "sweep --d 2 --n-data 120 --nodes 40 --replicates 2 --l-grid 0.1,0.5"
      " --families jacobi --inducing 10 --seed 11 -o ";
  const CliResult a = run_cli("--threads 1 " + common + one);
  REQUIRE(a.exit_code == 0);
  CHECK(parse_report(a.out).at("cells") == "10");  // 5 block sizes x 2 length scales
  const CliResult b = run_cli("--threads 4 " + common + four);
  REQUIRE(b.exit_code == 0);
  CHECK(slurp(one) == slurp(four));
  CHECK(slurp(one).rfind("family,l,param_name,param_value,mean_gain,stderr,replicates,censored\n",
                         0) == 0);
}

TEST_CASE("large-n output is byte-identical across thread counts") {
  const std::string one = kWorkDir + "/large_t1.csv";
  const std::string four = kWorkDir + "/large_t4.csv";
  const std::string common =
      "large-n --d 2 --n-data 100 --iters 400 --l 0.5 --seed 3 -o ";
  const CliResult a = run_cli("--threads 1 " + common + one);
  REQUIRE(a.exit_code == 0);
  const auto fields = parse_report(a.out);
  CHECK(std::stol(fields.at("nodes")) > 0);
  CHECK(fields.count("cg-iterations") == 1);
  CHECK(fields.count("pcg-iterations") == 1);
  const CliResult b = run_cli("--threads 4 " + common + four);
  REQUIRE(b.exit_code == 0);
  CHECK(slurp(one) == slurp(four));
  CHECK(slurp(one).rfind("iter,res_cg,sigma_cg,res_pcg,sigma_pcg\n", 0) == 0);
}
