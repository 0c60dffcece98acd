#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>

#include "alin/alin.hpp"
#include "alin/imaging.hpp"
#include "alin/io.hpp"
#include "alin/oracle.hpp"
#include "alin/penalties.hpp"
#include "alin/synth.hpp"
#include "alin/trace.hpp"

namespace alin::cli {
namespace {

namespace fs = std::filesystem;

/// Raised for bad flags or files; mapped to exit code 1.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::size_t> parse_shape(const std::string& s) {
    std::vector<std::size_t> dims;
    std::string tok;
    std::istringstream in(s);
    while (std::getline(in, tok, s.find('x') != std::string::npos ? 'x' : ',')) {
        if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](unsigned char c) { return std::isdigit(c); }))
            throw InputError("--shape: expected dimensions like 16x16 or 8,8,4, got '" + s + "'");
        dims.push_back(static_cast<std::size_t>(std::stoull(tok)));
    }
    if (dims.empty() || dims.size() > 3) throw InputError("--shape: 1 to 3 dimensions required");
    return dims;
}

struct ProblemFlags {
    std::string x_file;
    bool identity_design = false;
    std::string y_file;
    std::string penalty = "identity";
    std::string shape;
    std::vector<std::string> stack;
    std::vector<double> weights;
    double lambda = 1.0;
};

void add_problem_flags(CLI::App* app, ProblemFlags& f) {
    auto* x = app->add_option("--x", f.x_file, "Design matrix X (Matrix Market)")->check(CLI::ExistingFile);
    auto* id = app->add_flag("--identity-design", f.identity_design, "Use X = I (p = length of y)");
    x->excludes(id);
    app->add_option("--y", f.y_file, "Response vector y (CSV, one value per line)")->required()->check(CLI::ExistingFile);
    app->add_option("--penalty", f.penalty,
                    "identity | diff1d | tv2d | tv3d | stacked, or a Matrix Market file holding R")
        ->capture_default_str();
    app->add_option("--shape", f.shape, "Grid shape for tv2d/tv3d/stacked, e.g. 16x16 or 8x8x4");
    app->add_option("--stack", f.stack, "Blocks for --penalty stacked (identity|diff1d|tv2d|tv3d)")->delimiter(',');
    app->add_option("--weights", f.weights, "Positive weights for the stacked blocks")->delimiter(',');
    app->add_option("--lambda", f.lambda, "Penalty weight (> 0)")->capture_default_str();
}

SparseMatrix named_penalty(const std::string& name, std::size_t p, const std::optional<penalties::GridShape>& shape) {
    const auto need_shape = [&](std::size_t rank) -> const penalties::GridShape& {
        if (!shape) throw InputError("penalty '" + name + "' needs --shape");
        if (shape->rank() != rank) throw InputError("penalty '" + name + "' needs a " + std::to_string(rank) + "-D --shape");
        if (shape->total() != p)
            throw InputError("--shape has " + std::to_string(shape->total()) + " cells but p = " + std::to_string(p));
        return *shape;
    };
    if (name == "identity") return penalties::build_identity(p);
    if (name == "diff1d") return penalties::build_diff_1d(p);
    if (name == "tv2d") return penalties::build_tv_2d(need_shape(2));
    if (name == "tv3d") return penalties::build_tv_3d(need_shape(3));
    throw InputError("unknown penalty '" + name + "'");
}

SparseMatrix build_penalty(const ProblemFlags& f, std::size_t p) {
    std::optional<penalties::GridShape> shape;
    if (!f.shape.empty()) shape = penalties::GridShape(parse_shape(f.shape));
    if (f.penalty == "stacked") {
        if (f.stack.empty()) throw InputError("--penalty stacked needs --stack");
        std::vector<double> w = f.weights.empty() ? std::vector<double>(f.stack.size(), 1.0) : f.weights;
        if (w.size() != f.stack.size()) throw InputError("--weights must have one entry per --stack block");
        std::vector<penalties::WeightedBlock> blocks;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (!(w[i] > 0.0)) throw InputError("--weights must be positive");
            blocks.push_back({w[i], named_penalty(f.stack[i], p, shape)});
        }
        return penalties::build_stacked(blocks);
    }
    if (fs::exists(f.penalty)) {
        SparseMatrix r = io::read_matrix_market(fs::path(f.penalty));
        if (r.cols() != p)
            throw InputError(f.penalty + ": R has " + std::to_string(r.cols()) + " columns but p = " + std::to_string(p));
        return r;
    }
    return named_penalty(f.penalty, p, shape);
}

Problem load_problem(const ProblemFlags& f) {
    if (!(f.lambda > 0.0) || !std::isfinite(f.lambda)) throw InputError("--lambda must be positive");
    if (f.x_file.empty() && !f.identity_design) throw InputError("one of --x or --identity-design is required");
    Vector y = io::read_vector_csv(fs::path(f.y_file));
    if (y.empty()) throw InputError(f.y_file + ": empty vector");
    SparseMatrix x = f.identity_design ? SparseMatrix::identity(y.size()) : io::read_matrix_market(fs::path(f.x_file));
    if (x.rows() != y.size())
        throw InputError("X has " + std::to_string(x.rows()) + " rows but y has " + std::to_string(y.size()) + " entries");
    SparseMatrix r = build_penalty(f, x.cols());
    return Problem(std::move(x), std::move(y), PenaltySpec(f.lambda, std::move(r)));
}

struct SolverFlags {
    double gamma = 0.1;
    double eps = 1e-10;
    double eps_rel = 1e-8;
    std::size_t max_iter = 1000;
    std::string variant = "alin";
    std::string trace;
};

void add_solver_flags(CLI::App* app, SolverFlags& s) {
    app->add_option("--gamma", s.gamma, "Update-test parameter in (0,1)")->capture_default_str();
    app->add_option("--eps", s.eps, "Absolute stopping tolerance")->capture_default_str();
    app->add_option("--eps-rel", s.eps_rel, "Relative stopping tolerance")->capture_default_str();
    app->add_option("--max-iter", s.max_iter, "Maximum outer iterations")->capture_default_str();
    app->add_option("--variant", s.variant, "alin | pr | dr-h | dr-f")->capture_default_str();
    app->add_option("--trace", s.trace, "Write the iteration trace as JSON lines");
}

AlinConfig make_config(const SolverFlags& s) {
    AlinConfig cfg;
    cfg.gamma = s.gamma;
    cfg.eps_abs = s.eps;
    cfg.eps_rel = s.eps_rel;
    cfg.max_iterations = s.max_iter;
    const auto v = parse_variant(s.variant);
    if (!v) throw InputError("unknown --variant '" + s.variant + "'");
    cfg.variant = *v;
    try {
        cfg.validate();
    } catch (const PreconditionError& e) {
        throw InputError(e.what());
    }
    return cfg;
}

void write_trace_file(const std::string& path, const std::vector<IterationRecord>& trace) {
    if (path.empty()) return;
    std::ofstream out(path);
    if (!out) throw InputError("cannot open '" + path + "' for writing");
    write_trace_jsonl(trace, out);
}

int status_code(RunStatus s) { return s == RunStatus::Optimal ? kOptimal : kMaxIterations; }

void report(std::ostream& out, const Problem& pb, const RunResult& r) {
    out << std::setprecision(12) << "status " << to_string(r.status) << "\niterations " << r.trace.size()
        << "\nobjective " << objective(pb, r.beta) << '\n';
}

std::uint64_t resolve_seed(std::uint64_t flag) {
    if (const char* env = std::getenv("ALIN_SEED"); env && *env) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw InputError(std::string("ALIN_SEED is not an unsigned integer: '") + env + "'");
        }
    }
    return flag;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Alternating linearization solver for 1/2||y - X b||^2 + lambda ||R b||_1"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Show help for every subcommand");

    // solve
    ProblemFlags solve_pf;
    SolverFlags solve_sf;
    std::string solve_beta0, solve_out;
    auto* solve = app.add_subcommand("solve", "Run ALIN on a problem read from files");
    add_problem_flags(solve, solve_pf);
    add_solver_flags(solve, solve_sf);
    solve->add_option("--beta0", solve_beta0, "Starting point (CSV); default y for X = I, else 0")
        ->check(CLI::ExistingFile);
    solve->add_option("--out", solve_out, "Write the solution (CSV)");

    // synth
    synth::SynthSpec spec;
    std::string synth_x, synth_y, synth_beta;
    auto* syn = app.add_subcommand("synth", "Generate a synthetic lasso instance (N(0,1) design, 10%/20% blocks)");
    syn->add_option("--n", spec.n, "Rows")->capture_default_str();
    syn->add_option("--p", spec.p, "Columns")->capture_default_str();
    syn->add_option("--sd", spec.sd, "Noise standard deviation")->capture_default_str();
    syn->add_option("--seed", spec.seed, "RNG seed (ALIN_SEED overrides)")->capture_default_str();
    syn->add_option("--out-x", synth_x, "X output (Matrix Market)")->required();
    syn->add_option("--out-y", synth_y, "y output (CSV)")->required();
    syn->add_option("--out-beta", synth_beta, "beta_true output (CSV)");

    // denoise
    std::string dn_in, dn_out, dn_trace;
    double dn_lambda = 0.05;
    auto* den = app.add_subcommand("denoise", "Total-variation denoising of a PGM image (X = I)");
    den->add_option("--image", dn_in, "Input PGM")->required()->check(CLI::ExistingFile);
    den->add_option("--lambda", dn_lambda, "Penalty weight (> 0)")->capture_default_str();
    den->add_option("--out", dn_out, "Output PGM")->required();
    den->add_option("--trace", dn_trace, "Write the iteration trace as JSON lines");

    // deblur
    std::string db_in, db_out, db_trace;
    double db_lambda = 0.05;
    bool db_blur = false;
    std::size_t db_max_iter = 1000;
    auto* deb = app.add_subcommand("deblur", "Total-variation deblurring of a PGM image (X = 4-neighbour blur)");
    deb->add_option("--image", db_in, "Input PGM")->required()->check(CLI::ExistingFile);
    deb->add_option("--lambda", db_lambda, "Penalty weight (> 0)")->capture_default_str();
    deb->add_flag("--blur", db_blur, "Blur the input with the same operator before restoring it");
    deb->add_option("--max-iter", db_max_iter, "Maximum outer iterations")->capture_default_str();
    deb->add_option("--out", db_out, "Output PGM")->required();
    deb->add_option("--trace", db_trace, "Write the iteration trace as JSON lines");

    // oracle
    ProblemFlags or_pf;
    std::size_t or_iters = 1'000'000;
    std::string or_out;
    auto* orc = app.add_subcommand("oracle", "Plain subgradient descent with step c/sqrt(t) (independent check)");
    add_problem_flags(orc, or_pf);
    orc->add_option("--iters", or_iters, "Subgradient iterations")->capture_default_str();
    orc->add_option("--out", or_out, "Write the best iterate (CSV)");

    // trace-plot
    std::string tp_in, tp_out;
    std::optional<double> tp_opt;
    auto* tpl = app.add_subcommand("trace-plot", "CSV of iteration vs. log10 objective error from a JSON-lines trace");
    tpl->add_option("--trace", tp_in, "Trace file (JSON lines)")->required()->check(CLI::ExistingFile);
    tpl->add_option("--optimal", tp_opt, "Reference optimal value (default: smallest objective in the trace)");
    tpl->add_option("--out", tp_out, "Output CSV (default: stdout)");

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : kInputError;
    }

    try {
        if (*solve) {
            const Problem pb = load_problem(solve_pf);
            const AlinConfig cfg = make_config(solve_sf);
            std::optional<Vector> beta0;
            if (!solve_beta0.empty()) {
                beta0 = io::read_vector_csv(fs::path(solve_beta0));
                if (beta0->size() != pb.p())
                    throw InputError(solve_beta0 + ": expected " + std::to_string(pb.p()) + " entries");
            }
            const RunResult r = alin::run(pb, cfg, beta0);
            if (!solve_out.empty()) io::write_vector_csv(r.beta, fs::path(solve_out));
            write_trace_file(solve_sf.trace, r.trace);
            report(out, pb, r);
            return status_code(r.status);
        }
        if (*syn) {
            spec.seed = resolve_seed(spec.seed);
            const auto data = synth::synth_generate(spec);
            io::write_matrix_market(data.x, fs::path(synth_x));
            io::write_vector_csv(data.y, fs::path(synth_y));
            if (!synth_beta.empty()) io::write_vector_csv(data.beta_true, fs::path(synth_beta));
            out << "seed " << spec.seed << '\n';
            return 0;
        }
        if (*den || *deb) {
            const bool blur = deb->parsed();
            const double lambda = blur ? db_lambda : dn_lambda;
            if (!(lambda > 0.0)) throw InputError("--lambda must be positive");
            const imaging::ImageGrid img = imaging::read_pgm(fs::path(blur ? db_in : dn_in));
            const auto shape = img.shape();
            if (shape.total() < 2) throw InputError("image must have at least two pixels");
            SparseMatrix r = penalties::build_tv_2d(shape);
            SparseMatrix x = blur ? imaging::blur_operator(shape) : SparseMatrix::identity(shape.total());
            Vector y = img.values;
            if (blur && db_blur) y = matvec(x, y);
            const Problem pb(std::move(x), std::move(y), PenaltySpec(lambda, std::move(r)));
            AlinConfig cfg;
            if (blur) cfg.max_iterations = db_max_iter;
            const RunResult res = alin::run(pb, cfg);
            imaging::write_pgm(imaging::ImageGrid(img.width, img.height, res.beta), fs::path(blur ? db_out : dn_out));
            write_trace_file(blur ? db_trace : dn_trace, res.trace);
            report(out, pb, res);
            return status_code(res.status);
        }
        if (*orc) {
            const Problem pb = load_problem(or_pf);
            const auto best = oracle::subgradient_descent({pb.x(), pb.y(), pb.lambda(), pb.r()}, {or_iters, std::nullopt});
            if (!or_out.empty()) io::write_vector_csv(best.beta, fs::path(or_out));
            out << std::setprecision(12) << "objective " << best.objective << "\nbest_iteration " << best.iterations
                << '\n';
            return 0;
        }
        if (*tpl) {
            std::ifstream in(tp_in);
            const auto trace = read_trace_jsonl(in);
            if (trace.empty()) throw InputError(tp_in + ": empty trace");
            double optimal = tp_opt.value_or(std::numeric_limits<double>::infinity());
            if (!tp_opt)
                for (const auto& rec : trace) optimal = std::min(optimal, rec.objective);
            std::ofstream file;
            if (!tp_out.empty()) {
                file.open(tp_out);
                if (!file) throw InputError("cannot open '" + tp_out + "' for writing");
            }
            std::ostream& o = tp_out.empty() ? out : file;
            o << "k,objective,error,log10_error\n" << std::setprecision(17);
            for (const auto& rec : trace) {
                const double e = rec.objective - optimal;
                o << rec.k << ',' << rec.objective << ',' << e << ',';
                if (e > 0.0) o << std::log10(e);
                else o << "-inf";
                o << '\n';
            }
            return 0;
        }
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::invalid_argument& e) {  // DimensionError, PreconditionError
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::runtime_error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
    return kInputError;
}

}  // namespace alin::cli
