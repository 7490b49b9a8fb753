#include <doctest.h>

#include "cli.hpp"

#include "kconn/csv.hpp"
#include "kconn/cpmaps.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <vector>

using namespace kconn;

namespace {

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result invoke(std::vector<const char*> args) {
    args.insert(args.begin(), "kconn");
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::main_entry(static_cast<int>(args.size()), args.data(), out, err);
    return {code, out.str(), err.str()};
}

cli::RunConfig parse(std::vector<const char*> args) {
    args.insert(args.begin(), "kconn");
    auto parsed = cli::parse_args(static_cast<int>(args.size()), args.data());
    REQUIRE(std::holds_alternative<cli::RunConfig>(parsed));
    return std::get<cli::RunConfig>(parsed);
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("argument parsing") {
    const auto c = parse({"connect", "covderiv", "--kernel", "bergman-disk:nu=2", "--point", "0.5", "--direction", "1"});
    CHECK(c.command == "connect covderiv");
    REQUIRE(c.kernel.has_value());
    CHECK(c.kernel->nu == 2.0);
    CHECK(c.point == "0.5");
    const auto v = parse({"verify", "all", "--seed", "7"});
    CHECK(v.command == "verify");
    CHECK(v.module == "all");
    CHECK(v.seed == 7);
    CHECK(parse({"verify"}).seed == 42);
}

TEST_CASE("usage errors exit 2") {
    const auto bogus = invoke({"kernel", "eval", "--kernel", "bogus:x=1", "--point", "0"});
    CHECK(bogus.code == 2);
    CHECK(bogus.err.find("bergman-disk:nu=") != std::string::npos);
    CHECK(invoke({}).code == 2);
    CHECK(invoke({"frobnicate"}).code == 2);
    CHECK(invoke({"verify", "bogus"}).code == 2);
    CHECK(invoke({"kernel", "eval", "--kernel", "bergman-disk:nu=2", "--point", "0.5+"}).code == 2);
    CHECK(invoke({"kernel", "eval", "--kernel", "bergman-disk:nu=2", "--point", "1.5"}).code == 2);
    CHECK(invoke({"cp", "dilate", "--choi", "/nonexistent/choi.csv"}).code != 0);
    CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("kernel eval and gram") {
    const auto eval = invoke({"kernel", "eval", "--kernel", "bergman-disk:nu=2", "--point", "0.5"});
    CHECK(eval.code == 0);
    CHECK(std::abs(csv::parse_complex(eval.out.substr(0, eval.out.find('\n'))) - 16.0 / 9.0) < 1e-14);
    const auto half = invoke({"kernel", "eval", "--kernel", "bergman-halfplane:nu=1", "--point", "1i"});
    CHECK(half.out == "0.25+0i\n");
    const auto gram = invoke({"kernel", "gram", "--kernel", "bergman-disk:nu=2", "--points", "0;0.5;-0.5"});
    CHECK(gram.code == 0);
    std::istringstream in(gram.out);
    const CMatrix g = csv::read_matrix(in);
    CHECK(g.rows() == 3);
    CHECK(std::abs(g(1, 2) - 0.64) < 1e-14);
}

TEST_CASE("rkhs universality reports JSON") {
    const auto r = invoke({"rkhs", "universality", "--kernel", "fock:dim=2", "--random-points", "6"});
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.at("residual").get<double>() < 1e-9);
    CHECK(j.contains("tolerance"));
}

TEST_CASE("covariant derivative examples") {
    const auto disk = invoke({"connect", "covderiv", "--kernel", "bergman-disk:nu=2", "--point", "0.5", "--direction",
                              "1"});
    CHECK(disk.code == 0);
    const auto j = nlohmann::json::parse(disk.out);
    CHECK(std::abs(csv::parse_complex(j.at("closed").at(0).get<std::string>()) - 4.0 / 3.0) < 1e-10);
    CHECK(j.at("max_disagreement").get<double>() < 1e-6);
    const auto fock = invoke({"connect", "covderiv", "--kernel", "fock:dim=2", "--point", "1,0", "--direction", "1,0",
                              "--section", "coord:0"});
    CHECK(fock.code == 0);
    CHECK(std::abs(csv::parse_complex(nlohmann::json::parse(fock.out).at("direct").at(0).get<std::string>()) - 2.0) <
          1e-8);
    CHECK(invoke({"connect", "covderiv", "--kernel", "universal:n=4", "--seed", "3"}).code == 0);
}

TEST_CASE("transport table converges at fourth order") {
    const auto r = invoke({"connect", "transport", "--kernel", "bergman-disk:nu=1", "--curve", "line:0:0.5", "--steps",
                           "64"});
    CHECK(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    CHECK(line == "steps,components,delta,order");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 4);
}

TEST_CASE("cp subcommands") {
    const auto psi = cpmaps::random_unital_cp(3, 2, 2, 21);
    const std::string choi = "kconn_cli_choi.csv";
    const std::string v_path = "kconn_cli_v.csv";
    csv::write_matrix_file(choi, psi.choi());
    const auto d = invoke({"cp", "dilate", "--choi", choi.c_str(), "--input-dim", "3", "--v-output", v_path.c_str()});
    CHECK(d.code == 0);
    const auto j = nlohmann::json::parse(d.out);
    CHECK(j.at("rank").get<int>() == 2);
    CHECK(j.at("isometry_residual").get<double>() < 1e-12);
    const CMatrix v = csv::read_matrix_file(v_path);
    CHECK(v.rows() == 6);
    CHECK(v.cols() == 2);
    CHECK(invoke({"cp", "kernel", "--choi", choi.c_str(), "--input-dim", "3"}).code == 0);
    const auto cov = invoke({"cp", "covderiv", "--choi", choi.c_str(), "--input-dim", "3", "--probes", "5"});
    CHECK(cov.code == 0);
    CHECK(nlohmann::json::parse(cov.out).at("max_disagreement").get<double>() < 1e-6);
    std::remove(choi.c_str());
    std::remove(v_path.c_str());
}

TEST_CASE("grassmann verify") {
    const auto r = invoke({"grassmann", "verify", "--n", "4", "--k", "2", "--probes", "5"});
    CHECK(r.code == 0);
    CHECK(nlohmann::json::parse(r.out).at("passed").get<bool>());
}

TEST_CASE("verify exit codes and module filtering") {
    const auto grass = invoke({"verify", "grassmann", "--seed", "3"});
    CHECK(grass.code == 0);
    const auto j = nlohmann::json::parse(grass.out);
    for (const auto& [name, check] : j.at("checks").items()) CHECK(name.rfind("grassmann.", 0) == 0);
    const auto fault = invoke({"verify", "connections", "--inject-fault", "disk-sign"});
    CHECK(fault.code == 1);
    const auto failed = nlohmann::json::parse(fault.out).at("failed");
    bool names_disk = false;
    for (const auto& name : failed) names_disk = names_disk || name.get<std::string>().find("bergman-disk") != std::string::npos;
    CHECK(names_disk);
}

TEST_CASE("output file option") {
    const std::string path = "kconn_cli_out.csv";
    const auto r = invoke({"--output", path.c_str(), "kernel", "eval", "--kernel", "fock:dim=1", "--point", "0"});
    CHECK(r.code == 0);
    CHECK(r.out.empty());
    CHECK(csv::read_matrix_file(path)(0, 0) == cplx(1.0));
    std::remove(path.c_str());
}

TEST_CASE("tolerance from the environment") {
    ::setenv("KERNEL_CONNECT_TOL", "1e-6", 1);
    CHECK(parse({"verify"}).tolerance == 1e-6);
    ::setenv("KERNEL_CONNECT_TOL", "-3", 1);
    std::vector<const char*> args{"kconn", "verify"};
    const auto parsed = cli::parse_args(2, args.data());
    CHECK(std::holds_alternative<cli::ExitRequest>(parsed));
    CHECK(std::get<cli::ExitRequest>(parsed).code == 2);
    ::unsetenv("KERNEL_CONNECT_TOL");
    CHECK(parse({"verify"}).tolerance == numerics::kDefaultTolerance);
}

}  // TEST_SUITE
