#include "cli.hpp"

#include "kconn/connections.hpp"
#include "kconn/cpmaps.hpp"
#include "kconn/csv.hpp"
#include "kconn/rkhs.hpp"
#include "kconn/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace kconn::cli {

namespace {

using nlohmann::json;

/// Errors caused by the user's input rather than by a failed computation.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

void validate_literal_list(const std::string& text, char sep, const char* what) {
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = text.find(sep, pos);
        const std::string item = text.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        try {
            csv::parse_vector(item);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("malformed ") + what + " '" + item + "': " + e.what());
        }
        if (next == std::string::npos) break;
        pos = next + 1;
    }
}

struct LineCurve {
    std::string from;
    std::string to;
};

LineCurve parse_curve(const std::string& text) {
    // line:<a>:<b>
    const std::string prefix = "line:";
    if (text.rfind(prefix, 0) != 0) throw ConfigError("curve must have the form line:<from>:<to>, got '" + text + "'");
    const std::string rest = text.substr(prefix.size());
    const std::size_t colon = rest.find(':');
    if (colon == std::string::npos) throw ConfigError("curve must have the form line:<from>:<to>, got '" + text + "'");
    LineCurve c{rest.substr(0, colon), rest.substr(colon + 1)};
    validate_literal_list(c.from, '\0', "curve endpoint");
    validate_literal_list(c.to, '\0', "curve endpoint");
    return c;
}

std::string matrix_csv(const CMatrix& m) {
    std::ostringstream os;
    csv::write_matrix(os, m);
    return os.str();
}

json matrix_json(const CMatrix& m) {
    json rows = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(csv::format_complex(m(i, j)));
        rows.push_back(row);
    }
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"entries", rows}};
}

json vector_json(const CVector& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(csv::format_complex(v(i)));
    return out;
}

std::string emit_matrix(const RunConfig& c, const CMatrix& m) {
    if (c.format == "json") return matrix_json(m).dump(2) + "\n";
    return matrix_csv(m);
}

Kernel kernel_of(const RunConfig& c) {
    if (!c.kernel) throw ConfigError("--kernel is required");
    KernelSpec spec = *c.kernel;
    spec.input_dim = c.input_dim;
    return build_kernel(spec);
}

bool literal_domain(const Domain& d) {
    return d.kind == DomainKind::Disk || d.kind == DomainKind::HalfPlane || d.kind == DomainKind::ComplexSpace;
}

std::vector<BasePoint> sample_points(const RunConfig& c, const Kernel& k) {
    if (!c.points.empty()) return parse_points(k.domain(), c.points);
    Rng rng(c.seed);
    const int count = c.random_points > 0 ? c.random_points : 8;
    std::vector<BasePoint> pts;
    for (int i = 0; i < count; ++i) pts.push_back(random_point(k.domain(), rng));
    return pts;
}

/// Built-in sections on C^d domains: one, coord:j, conj:j, exp (of z_0);
/// matrix domains only support one.
Section builtin_section(const std::string& name, const Kernel& k) {
    const Index m = k.fiber_dim();
    if (name == "one") return constant_section(CVector::Ones(m));
    if (!literal_domain(k.domain())) {
        throw ConfigError("section '" + name + "' is not available on " + k.domain().name() + "; use one");
    }
    const Index d = k.domain().dim;
    auto index_of = [&](const std::string& prefix) {
        const std::string digits = name.substr(prefix.size());
        char* end = nullptr;
        const long j = std::strtol(digits.c_str(), &end, 10);
        if (digits.empty() || *end != '\0' || j < 0 || j >= d) {
            throw ConfigError("section '" + name + "': index must be in [0, " + std::to_string(d - 1) + "]");
        }
        return static_cast<Index>(j);
    };
    Section sigma;
    sigma.fiber_dim = 1;
    if (name.rfind("coord:", 0) == 0) {
        const Index j = index_of("coord:");
        sigma.value = [j](const BasePoint& s) { return CVector::Constant(1, as_vector(s)(j)).eval(); };
        sigma.differential = [j](const BasePoint&, const TangentVector& x) {
            return CVector::Constant(1, std::get<CVector>(x)(j)).eval();
        };
    } else if (name.rfind("conj:", 0) == 0) {
        const Index j = index_of("conj:");
        sigma.value = [j](const BasePoint& s) { return CVector::Constant(1, std::conj(as_vector(s)(j))).eval(); };
        sigma.differential = [j](const BasePoint&, const TangentVector& x) {
            return CVector::Constant(1, std::conj(std::get<CVector>(x)(j))).eval();
        };
    } else if (name == "exp") {
        sigma.value = [](const BasePoint& s) { return CVector::Constant(1, std::exp(as_vector(s)(0))).eval(); };
        sigma.differential = [](const BasePoint& s, const TangentVector& x) {
            return CVector::Constant(1, std::exp(as_vector(s)(0)) * std::get<CVector>(x)(0)).eval();
        };
    } else {
        throw ConfigError("unknown section '" + name + "'; expected one, coord:<j>, conj:<j> or exp");
    }
    if (m != 1) throw ConfigError("section '" + name + "' is scalar but the kernel fiber has dimension " + std::to_string(m));
    return sigma;
}

void write_result(const RunConfig& c, std::ostream& out, const std::string& text) {
    if (c.output.empty()) {
        out << text;
        return;
    }
    std::ofstream file(c.output, std::ios::binary);
    if (!file) throw ConfigError("cannot open output file " + c.output);
    file << text;
}

int cmd_kernel_eval(const RunConfig& c, std::ostream& out) {
    const Kernel k = kernel_of(c);
    BasePoint s;
    BasePoint t;
    if (literal_domain(k.domain())) {
        if (c.point.empty()) throw ConfigError("kernel eval needs --point");
        s = parse_point(k.domain(), c.point);
        t = c.second_point.empty() ? s : parse_point(k.domain(), c.second_point);
    } else {
        Rng rng(c.seed);
        s = random_point(k.domain(), rng);
        t = random_point(k.domain(), rng);
    }
    write_result(c, out, emit_matrix(c, k(s, t)));
    return kExitOk;
}

int cmd_kernel_gram(const RunConfig& c, std::ostream& out, bool certified) {
    const Kernel k = kernel_of(c);
    const auto pts = sample_points(c, k);
    if (!certified) {
        write_result(c, out, emit_matrix(c, kernels::gram_matrix(k, pts)));
        return kExitOk;
    }
    const RKHSHandle r = rkhs::build_rkhs(k, pts, 0.0, numerics::kPinvThreshold, c.tolerance);
    write_result(c, out, emit_matrix(c, r->gram));
    return kExitOk;
}

int cmd_rkhs_universality(const RunConfig& c, std::ostream& out) {
    constexpr double kTol = 1e-8;
    const Kernel k = kernel_of(c);
    const RKHSHandle r = rkhs::build_rkhs(k, sample_points(c, k), 0.0, numerics::kPinvThreshold, c.tolerance);
    const double residual = rkhs::universality_residual(r);
    json j{{"residual", residual}, {"min_eig", r->certificate.min_eigenvalue}, {"tolerance", kTol}};
    write_result(c, out, j.dump(2) + "\n");
    return residual < kTol ? kExitOk : kExitFailure;
}

int cmd_covderiv(const RunConfig& c, std::ostream& out) {
    constexpr double kTol = 1e-6;
    const Kernel k = kernel_of(c);
    BasePoint s;
    TangentVector x;
    if (literal_domain(k.domain())) {
        if (c.point.empty() || c.direction.empty()) throw ConfigError("connect covderiv needs --point and --direction");
        s = parse_point(k.domain(), c.point);
        x = parse_direction(k.domain(), c.direction);
    } else {
        Rng rng(c.seed);
        s = random_point(k.domain(), rng);
        x = random_direction(k.domain(), s, rng);
    }
    const Section sigma = builtin_section(c.section, k);
    const CVector closed = connections::closed_form_evaluator(k)(sigma, s, x);
    const CVector direct = connections::direct_evaluator(k)(sigma, s, x);
    const CVector sampled = connections::sampled_evaluator(k)(sigma, s, x);
    const double disagreement = std::max({(closed - direct).norm(), (direct - sampled).norm(), (closed - sampled).norm()});
    json j{{"kernel", k.name()},
           {"section", c.section},
           {"closed", vector_json(closed)},
           {"direct", vector_json(direct)},
           {"sampled", vector_json(sampled)},
           {"max_disagreement", disagreement},
           {"tolerance", kTol}};
    write_result(c, out, j.dump(2) + "\n");
    return disagreement < kTol ? kExitOk : kExitFailure;
}

int cmd_transport(const RunConfig& c, std::ostream& out) {
    const Kernel k = kernel_of(c);
    if (!literal_domain(k.domain())) throw ConfigError("connect transport supports C^d domains only");
    if (c.curve.empty()) throw ConfigError("connect transport needs --curve line:<from>:<to>");
    if (c.steps < 1) throw ConfigError("--steps must be >= 1");
    const LineCurve lc = parse_curve(c.curve);
    const BasePoint a = parse_point(k.domain(), lc.from);
    const BasePoint b = parse_point(k.domain(), lc.to);
    const Curve gamma = line_curve(as_vector(a), as_vector(b));
    CVector v0 = CVector::Ones(k.fiber_dim());
    if (!c.v0.empty()) {
        v0 = csv::parse_vector(c.v0);
        if (v0.size() != k.fiber_dim()) throw ConfigError("--v0 must have " + std::to_string(k.fiber_dim()) + " entries");
    }
    // reference: 64 times the finest step count in the table
    const CVector reference = connections::parallel_transport(k, gamma, v0, c.steps * 8 * 64);
    const auto rows = connections::transport_table(k, gamma, v0, {c.steps, 2 * c.steps, 4 * c.steps, 8 * c.steps}, reference);
    std::ostringstream os;
    os << "steps,components,delta,order\n";
    for (const auto& row : rows) {
        os << row.steps << ",\"" << csv::format_vector(row.value) << "\"," << json(row.delta).dump() << ","
           << json(row.order).dump() << "\n";
    }
    write_result(c, out, os.str());
    return kExitOk;
}

int cmd_grassmann_verify(const RunConfig& c, std::ostream& out) {
    const auto report = verify::grassmann_agreement(c.n, c.k, c.probes, c.seed);
    write_result(c, out, report.to_json());
    return report.passed() ? kExitOk : kExitFailure;
}

cpmaps::CPMap cp_map_of(const RunConfig& c) {
    std::string path = c.choi_path;
    if (path.empty() && c.kernel && c.kernel->family == KernelSpec::Family::CP) path = c.kernel->choi_path;
    if (path.empty()) throw ConfigError("--choi <file.csv> is required");
    return load_cp_map(path, c.input_dim);
}

int cmd_cp_dilate(const RunConfig& c, std::ostream& out) {
    constexpr double kIsometryTol = 1e-12;
    constexpr double kDilationTol = 1e-10;
    const auto psi = cp_map_of(c);
    const auto s = cpmaps::stinespring_dilate(psi);
    const double isometry = (s.v.adjoint() * s.v - CMatrix::Identity(s.v.cols(), s.v.cols())).norm();
    const double dilation = cpmaps::verify_dilation(psi, s);
    json j{{"input_dim", psi.input_dim()},
           {"output_dim", psi.output_dim()},
           {"rank", s.rank},
           {"isometry_residual", isometry},
           {"isometry_tolerance", kIsometryTol},
           {"dilation_residual", dilation},
           {"dilation_tolerance", kDilationTol}};
    if (!c.v_output.empty()) {
        csv::write_matrix_file(c.v_output, s.v);
        j["v_csv"] = c.v_output;
    } else {
        j["v"] = matrix_json(s.v);
    }
    write_result(c, out, j.dump(2) + "\n");
    return isometry < kIsometryTol && dilation < kDilationTol ? kExitOk : kExitFailure;
}

int cmd_cp_kernel(const RunConfig& c, std::ostream& out) {
    const Kernel k = cpmaps::cp_kernel(cp_map_of(c));
    Rng rng(c.seed);
    std::vector<BasePoint> pts;
    const int count = c.random_points > 0 ? c.random_points : 8;
    for (int i = 0; i < count; ++i) pts.push_back(random_point(k.domain(), rng));
    write_result(c, out, emit_matrix(c, kernels::gram_matrix(k, pts)));
    return kExitOk;
}

int cmd_cp_covderiv(const RunConfig& c, std::ostream& out) {
    constexpr double kTol = 1e-6;
    const auto psi = cp_map_of(c);
    const Kernel k = cpmaps::cp_kernel(psi);
    Rng rng(c.seed);
    // sigma(u) = L u c, a smooth section with analytic differential
    const CMatrix l = rng.complex_matrix(psi.output_dim(), psi.input_dim());
    const CVector col = rng.complex_vector(psi.input_dim());
    Section sigma;
    sigma.fiber_dim = psi.output_dim();
    sigma.value = [l, col](const BasePoint& s) { return CVector(l * as_unitary(s) * col); };
    sigma.differential = [l, col](const BasePoint& s, const TangentVector& x) {
        return CVector(l * as_unitary(s) * std::get<Generator>(x).a * col);
    };
    double worst = 0.0;
    json probes = json::array();
    for (int i = 0; i < c.probes; ++i) {
        const CMatrix u = rng.unitary(psi.input_dim());
        const CMatrix a = rng.anti_hermitian(psi.input_dim());
        const CVector formula = cpmaps::cp_covariant_derivative(psi, sigma, u, a);
        const CVector generic = connections::covariant_derivative_direct(k, sigma, UnitaryElement{u}, Generator{a});
        worst = std::max(worst, (formula - generic).norm());
        probes.push_back(json{{"formula", vector_json(formula)}, {"generic", vector_json(generic)}});
    }
    json j{{"probes", probes}, {"max_disagreement", worst}, {"tolerance", kTol}};
    write_result(c, out, j.dump(2) + "\n");
    return worst < kTol ? kExitOk : kExitFailure;
}

int cmd_verify(const RunConfig& c, std::ostream& out) {
    verify::Options opt;
    opt.seed = c.seed;
    opt.module = c.module;
    opt.tolerance = c.tolerance;
    opt.inject_disk_sign_fault = c.inject_fault == "disk-sign";
    const auto report = verify::run(opt);
    write_result(c, out, report.to_json());
    return report.passed() ? kExitOk : kExitFailure;
}

}  // namespace

std::variant<RunConfig, ExitRequest> parse_args(int argc, const char* const* argv) {
    RunConfig c;
    if (const char* env = std::getenv("KERNEL_CONNECT_TOL")) {
        char* end = nullptr;
        const double tol = std::strtod(env, &end);
        if (end == env || *end != '\0' || !(tol > 0.0) || !std::isfinite(tol)) {
            return ExitRequest{kExitUsage, std::string("KERNEL_CONNECT_TOL must be a positive number, got '") + env + "'\n"};
        }
        c.tolerance = tol;
    }

    CLI::App app{"Connections and covariant derivatives induced by reproducing kernels", "kconn"};
    app.require_subcommand(1);
    std::string kernel_text;

    auto add_kernel = [&](CLI::App* sub, bool required = true) {
        auto* opt = sub->add_option("--kernel", kernel_text, "Kernel spec, e.g. bergman-disk:nu=2");
        if (required) opt->required();
        sub->add_option("--input-dim", c.input_dim, "Input dimension of a cp: kernel (default sqrt of the Choi size)");
    };
    auto add_sample = [&](CLI::App* sub) {
        sub->add_option("--points", c.points, "Semicolon-separated point literals");
        sub->add_option("--random-points", c.random_points, "Number of random sample points (default 8)");
        sub->add_option("--seed", c.seed, "Seed for random points");
    };
    auto add_format = [&](CLI::App* sub) {
        sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
    };
    app.add_option("--output", c.output, "Write the result to this file instead of stdout");

    auto* kernel = app.add_subcommand("kernel", "Evaluate kernels");
    kernel->require_subcommand(1);
    auto* kernel_eval = kernel->add_subcommand("eval", "kappa(s, t) as a matrix");
    add_kernel(kernel_eval);
    kernel_eval->add_option("--point", c.point, "First point s");
    kernel_eval->add_option("--second-point", c.second_point, "Second point t (default s)");
    kernel_eval->add_option("--seed", c.seed, "Seed for random points on matrix domains");
    add_format(kernel_eval);
    auto* kernel_gram = kernel->add_subcommand("gram", "Block Gram matrix over sample points");
    add_kernel(kernel_gram);
    add_sample(kernel_gram);
    add_format(kernel_gram);

    auto* rkhs_cmd = app.add_subcommand("rkhs", "Sampled reproducing kernel Hilbert spaces");
    rkhs_cmd->require_subcommand(1);
    auto* rkhs_gram = rkhs_cmd->add_subcommand("gram", "Certified Gram matrix of the sampled space");
    add_kernel(rkhs_gram);
    add_sample(rkhs_gram);
    add_format(rkhs_gram);
    auto* rkhs_univ = rkhs_cmd->add_subcommand("universality", "Universality residual as JSON");
    add_kernel(rkhs_univ);
    add_sample(rkhs_univ);

    auto* connect = app.add_subcommand("connect", "Covariant derivatives and parallel transport");
    connect->require_subcommand(1);
    auto* covderiv = connect->add_subcommand("covderiv", "Covariant derivative by three backends");
    add_kernel(covderiv);
    covderiv->add_option("--point", c.point, "Base point");
    covderiv->add_option("--direction", c.direction, "Tangent direction");
    covderiv->add_option("--section", c.section, "one | coord:<j> | conj:<j> | exp");
    covderiv->add_option("--seed", c.seed, "Seed for a random probe on matrix domains");
    auto* transport = connect->add_subcommand("transport", "Parallel transport with a convergence table");
    add_kernel(transport);
    transport->add_option("--curve", c.curve, "line:<from>:<to>")->required();
    transport->add_option("--steps", c.steps, "Step count of the coarsest row");
    transport->add_option("--v0", c.v0, "Initial fiber vector (default all ones)");

    auto* grass = app.add_subcommand("grassmann", "Grassmannian connections");
    grass->require_subcommand(1);
    auto* grass_verify = grass->add_subcommand("verify", "Three-way agreement on Gr(k, C^n)");
    grass_verify->add_option("--n", c.n, "Ambient dimension");
    grass_verify->add_option("--k", c.k, "Subspace dimension");
    grass_verify->add_option("--probes", c.probes, "Number of random probes");
    grass_verify->add_option("--seed", c.seed, "Seed");

    auto* cp = app.add_subcommand("cp", "Completely positive maps");
    cp->require_subcommand(1);
    auto* cp_dilate = cp->add_subcommand("dilate", "Minimal Stinespring dilation");
    auto* cp_kernel = cp->add_subcommand("kernel", "Gram of K(s, t) = Psi(s* t) over random unitaries");
    auto* cp_cov = cp->add_subcommand("covderiv", "Covariant derivative formula vs the generic pipeline");
    for (auto* sub : {cp_dilate, cp_kernel, cp_cov}) {
        sub->add_option("--choi", c.choi_path, "Choi matrix CSV")->required();
        sub->add_option("--input-dim", c.input_dim, "Input dimension n (default sqrt of the Choi size)");
        sub->add_option("--seed", c.seed, "Seed");
    }
    cp_dilate->add_option("--v-output", c.v_output, "Write V as CSV to this file");
    cp_kernel->add_option("--random-points", c.random_points, "Number of random unitaries (default 8)");
    add_format(cp_kernel);
    cp_cov->add_option("--probes", c.probes, "Number of random probes");

    auto* verify_cmd = app.add_subcommand("verify", "Run the verification suite");
    verify_cmd->add_option("module", c.module, "all or one module");
    verify_cmd->add_option("--seed", c.seed, "Seed (default 42)");
    verify_cmd->add_option("--inject-fault", c.inject_fault, "Test hook")->group("")->check(CLI::IsMember({"disk-sign"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        return ExitRequest{kExitOk, app.help()};
    } catch (const CLI::CallForAllHelp&) {
        return ExitRequest{kExitOk, app.help("", CLI::AppFormatMode::All)};
    } catch (const CLI::ParseError& e) {
        return ExitRequest{kExitUsage, std::string(e.what()) + "\nRun with --help for usage.\n"};
    }

    for (const auto* top : app.get_subcommands()) {
        c.command = top->get_name();
        for (const auto* sub : top->get_subcommands()) c.command += " " + sub->get_name();
    }

    try {
        if (!kernel_text.empty()) c.kernel = parse_kernel_spec(kernel_text);
        if (!c.point.empty()) validate_literal_list(c.point, '\0', "point");
        if (!c.second_point.empty()) validate_literal_list(c.second_point, '\0', "point");
        if (!c.points.empty()) validate_literal_list(c.points, ';', "point");
        if (!c.direction.empty()) validate_literal_list(c.direction, '\0', "direction");
        if (!c.v0.empty()) validate_literal_list(c.v0, '\0', "vector");
        if (!c.curve.empty()) parse_curve(c.curve);
        if (c.command == "verify" && c.module != "all") {
            const auto& names = verify::modules();
            if (std::find(names.begin(), names.end(), c.module) == names.end()) {
                throw ConfigError("unknown verify module '" + c.module + "'");
            }
        }
    } catch (const std::invalid_argument& e) {
        return ExitRequest{kExitUsage, std::string(e.what()) + "\n"};
    }
    return c;
}

int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
    try {
        if (c.command == "kernel eval") return cmd_kernel_eval(c, out);
        if (c.command == "kernel gram") return cmd_kernel_gram(c, out, false);
        if (c.command == "rkhs gram") return cmd_kernel_gram(c, out, true);
        if (c.command == "rkhs universality") return cmd_rkhs_universality(c, out);
        if (c.command == "connect covderiv") return cmd_covderiv(c, out);
        if (c.command == "connect transport") return cmd_transport(c, out);
        if (c.command == "grassmann verify") return cmd_grassmann_verify(c, out);
        if (c.command == "cp dilate") return cmd_cp_dilate(c, out);
        if (c.command == "cp kernel") return cmd_cp_kernel(c, out);
        if (c.command == "cp covderiv") return cmd_cp_covderiv(c, out);
        if (c.command == "verify") return cmd_verify(c, out);
        err << "unknown command '" << c.command << "'\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        // SpecError, ConfigError, csv::ParseError, DomainError and bad inputs
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "failed: " << e.what() << "\n";
        return kExitFailure;
    }
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    auto parsed = parse_args(argc, argv);
    if (auto* exit = std::get_if<ExitRequest>(&parsed)) {
        (exit->code == kExitOk ? out : err) << exit->message;
        return exit->code;
    }
    return run(std::get<RunConfig>(parsed), out, err);
}

}  // namespace kconn::cli
