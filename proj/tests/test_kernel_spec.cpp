#include <doctest.h>

#include "kconn/csv.hpp"
#include "kconn/kernel_spec.hpp"

#include <cstdio>

using namespace kconn;

TEST_SUITE("kernel_spec") {

TEST_CASE("valid specs parse and print canonically") {
    const auto disk = parse_kernel_spec("bergman-disk:nu=2");
    CHECK(disk.family == KernelSpec::Family::BergmanDisk);
    CHECK(disk.nu == 2.0);
    CHECK(disk.canonical() == "bergman-disk:nu=2");
    CHECK(parse_kernel_spec("bergman-halfplane:nu=1.5").canonical() == "bergman-halfplane:nu=1.5");
    CHECK(parse_kernel_spec("fock:dim=3").dim == 3);
    const auto univ = parse_kernel_spec("universal:n=5");
    CHECK(univ.n == 5);
    CHECK(univ.k == 2);
    CHECK(univ.canonical() == "universal:n=5,k=2");
    CHECK(parse_kernel_spec("universal:n=4,k=3").k == 3);
    const auto cp = parse_kernel_spec("cp:/tmp/choi.csv");
    CHECK(cp.family == KernelSpec::Family::CP);
    CHECK(cp.choi_path == "/tmp/choi.csv");
}

TEST_CASE("invalid specs raise SpecError carrying the grammar") {
    for (const char* bad : {"bogus:x=1", "bergman-disk", "bergman-disk:", "bergman-disk:nu=0.5", "bergman-disk:nu=x",
                            "bergman-disk:nu=2,nu=3", "bergman-disk:mu=2", "fock:dim=0", "fock:dim=1.5",
                            "universal:n=2,k=3", "universal:k=1", "cp:"}) {
        CAPTURE(bad);
        try {
            parse_kernel_spec(bad);
            FAIL("accepted an invalid spec");
        } catch (const SpecError& e) {
            CHECK(std::string(e.what()).find("bergman-disk:nu=") != std::string::npos);
        }
    }
}

TEST_CASE("points and directions") {
    const Kernel fock = build_kernel(parse_kernel_spec("fock:dim=2"));
    const BasePoint p = parse_point(fock.domain(), "1,0.5-2i");
    CHECK(as_vector(p)(1) == cplx(0.5, -2.0));
    CHECK_THROWS(parse_point(fock.domain(), "1"));
    const Kernel disk = build_kernel(parse_kernel_spec("bergman-disk:nu=2"));
    CHECK_THROWS_AS(parse_point(disk.domain(), "1.2"), DomainError);
    CHECK(parse_points(disk.domain(), "0;0.5;-0.5").size() == 3);
    CHECK(std::get<CVector>(parse_direction(disk.domain(), "2i"))(0) == cplx(0.0, 2.0));
    const Kernel q = build_kernel(parse_kernel_spec("universal:n=4"));
    CHECK_THROWS(parse_point(q.domain(), "1"));
}

TEST_CASE("random points lie in their domains") {
    Rng rng(1);
    for (const char* spec : {"bergman-disk:nu=1", "bergman-halfplane:nu=2", "fock:dim=3", "universal:n=4,k=2"}) {
        const Kernel k = build_kernel(parse_kernel_spec(spec));
        for (int i = 0; i < 10; ++i) {
            const BasePoint s = random_point(k.domain(), rng);
            CHECK_NOTHROW(k.domain().check(s));
            const TangentVector x = random_direction(k.domain(), s, rng);
            CHECK_NOTHROW(k(s, move_along(s, x, 1e-3)));
        }
    }
}

TEST_CASE("cp maps load from Choi files") {
    const auto psi = cpmaps::random_unital_cp(3, 2, 2, 5);
    const std::string path = "kconn_test_choi.csv";
    csv::write_matrix_file(path, psi.choi());
    CHECK_THROWS(load_cp_map(path, 0));  // 6 is not a perfect square
    const auto loaded = load_cp_map(path, 3);
    CHECK(loaded.output_dim() == 2);
    CHECK((loaded.choi() - psi.choi()).norm() == 0.0);
    KernelSpec spec = parse_kernel_spec("cp:" + path);
    spec.input_dim = 3;
    CHECK(build_kernel(spec).fiber_dim() == 2);
    CHECK_THROWS(load_cp_map(path, 4));
    std::remove(path.c_str());
}

}  // TEST_SUITE
