// Command-line front end: pool, attnmap, gradcheck, tournament, inspect.
// Exit codes: 0 success, 1 usage/contract/config, 2 I/O, 3 numeric.

#include "genpool/attnmap.hpp"
#include "genpool/errors.hpp"
#include "genpool/gradcheck.hpp"
#include "genpool/methods.hpp"
#include "genpool/tensor_io.hpp"
#include "genpool/tournament.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace genpool;

namespace {

struct PoolFlags {
    std::string input, method, config, out, attn_out, family;
    double gamma = 0, epsilon = 0, r = 0;
    std::size_t k = 0, iters = 0, heads = 0, width = 0, height = 0;
    std::uint64_t seed = 0;
    bool full = false, no_layernorm = false;
};

struct AttnFlags {
    std::string attn, pgm, mask_pgm;
    std::size_t width = 0, height = 0, column = 0;
    double mass = 0.6;
    bool bbox = false;
};

struct GradFlags {
    std::string method = "simpool";
    std::size_t d = 8, p = 12, trials = 20;
    double gamma = 2.0, h = 1e-4, tol = 1e-5;
    std::uint64_t seed = 0;
};

struct TourFlags {
    TournamentOptions opts;
    std::string methods, out;
    bool timing = false;
};

// Writes a k=1 result as a 1-D array and anything wider as 2-D.
void write_result(const Mat& m, const std::string& path) {
    if (m.cols() == 1) {
        write_npy_vector(m, path);
    } else {
        write_npy(m, path);
    }
}

int cmd_pool(const PoolFlags& f, const CLI::App& sub) {
    RunConfig cfg;
    if (!f.config.empty()) cfg = load_config(f.config);
    auto given = [&](const char* name) { return sub.get_option(name)->count() > 0; };
    if (given("--family")) {
        cfg.family = f.family;
        if (!given("--gamma") && (f.config.empty())) cfg.gamma = f.family == "transformer" ? 1.25 : 2.0;
    }
    if (given("--input")) cfg.input = f.input;
    if (given("--method")) cfg.method = f.method;
    if (given("--gamma")) cfg.gamma = f.gamma;
    if (given("--k")) cfg.k = f.k;
    if (given("--iters")) cfg.iters = f.iters;
    if (given("--heads")) cfg.heads = f.heads;
    if (given("--epsilon")) cfg.epsilon = f.epsilon;
    if (given("--r")) cfg.r = f.r;
    if (given("--seed")) cfg.seed = f.seed;
    if (given("--out")) cfg.output = f.out;
    if (given("--attn-out")) cfg.attn_output = f.attn_out;
    if (given("--width")) cfg.width = f.width;
    if (given("--height")) cfg.height = f.height;
    if (f.full) cfg.simplified = false;
    if (f.no_layernorm) cfg.layernorm = false;
    if (cfg.input.empty()) throw ConfigError("pool: an input file is required (--input or config \"input\")");

    const MethodOptions opts = options_from_config(cfg);
    const FeatureMap fm = to_feature_map(read_npy(cfg.input), cfg.width, cfg.height);
    const PooledSet res = run_method(cfg.method, fm, opts);

    if (!cfg.output.empty()) write_result(res.u, cfg.output);
    if (!cfg.attn_output.empty()) {
        if (!res.attention) throw ConfigError("pool: method '" + cfg.method + "' produces no attention");
        write_result(res.attention->a, cfg.attn_output);
    }
    std::cout << "method " << cfg.method << "\ninput " << fm.d() << "x" << fm.p() << " (grid " << fm.width() << "x"
              << fm.height() << ")\noutput " << res.u.rows() << "x" << res.u.cols() << "\n";
    if (res.attention) {
        std::cout << "attention " << res.attention->a.rows() << "x" << res.attention->a.cols()
                  << (res.attention->stochastic_cols ? " column-stochastic" : "") << "\n";
    }
    return 0;
}

int cmd_attnmap(const AttnFlags& f) {
    const Mat a = read_npy(f.attn).data;
    if (f.column >= a.cols()) throw ContractError("attnmap: column " + std::to_string(f.column) + " out of range");
    const AttnGrid grid = reshape_attention(a.col(f.column), f.width, f.height);
    if (!f.pgm.empty()) write_pgm(grid, f.pgm);
    if (f.bbox || !f.mask_pgm.empty()) {
        const Mask mask = mass_threshold(grid, f.mass);
        if (!f.mask_pgm.empty()) write_pgm(mask, f.mask_pgm);
        if (f.bbox) {
            const BBox b = largest_component_bbox(mask);
            std::cout << b.x_min << ' ' << b.y_min << ' ' << b.x_max << ' ' << b.y_max << "\n";
        }
    }
    return 0;
}

int cmd_gradcheck(const GradFlags& f) {
    if (f.method != "simpool") throw ConfigError("gradcheck: only simpool has analytic gradients");
    if (f.trials < 1) throw ConfigError("gradcheck: trials must be at least 1");
    bool ok = true;
    std::printf("%-6s %-6s %-14s %-14s %-6s %s\n", "trial", "param", "max_rel_err", "mean_rel_err", "worst", "status");
    for (std::size_t t = 0; t < f.trials; ++t) {
        for (const GradReport& r : check_simpool(f.d, f.p, f.gamma, f.h, f.seed + t)) {
            const bool pass = r.max_rel_error <= f.tol;
            ok = ok && pass;
            std::printf("%-6zu %-6s %-14.6e %-14.6e %-6zu %s\n", t, r.name.c_str(), r.max_rel_error,
                        r.mean_rel_error, r.worst_index, pass ? "pass" : "FAIL");
        }
    }
    std::printf("%s at tol %g\n", ok ? "all gradients pass" : "gradient check failed", f.tol);
    return ok ? 0 : 3;
}

int cmd_tournament(TourFlags f) {
    if (!f.methods.empty()) {
        std::stringstream ss(f.methods);
        std::string m;
        while (std::getline(ss, m, ',')) {
            if (!m.empty()) f.opts.methods.push_back(m);
        }
    }
    const std::string tsv = format_tsv(run_tournament(f.opts), f.timing);
    if (f.out.empty()) {
        std::cout << tsv;
    } else {
        std::ofstream out(f.out, std::ios::binary);
        if (!out) throw IoError("cannot open " + f.out + " for writing");
        out << tsv;
        if (!out) throw IoError("failed writing " + f.out);
    }
    return 0;
}

int cmd_inspect(const std::string& path) {
    const NpyHeader h = read_npy_header(path);
    std::cout << "descr " << h.descr << "\nfortran_order " << (h.fortran_order ? "True" : "False") << "\nshape (";
    for (std::size_t i = 0; i < h.shape.size(); ++i) std::cout << (i ? ", " : "") << h.shape[i];
    std::cout << ")\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generalized pooling toolkit"};
    app.require_subcommand(1);

    PoolFlags pf;
    CLI::App* pool = app.add_subcommand("pool", "Pool a feature file with one method");
    pool->add_option("--input", pf.input, "Feature NPY file (d x p, or d x H x W)");
    pool->add_option("--method", pf.method, "Method name");
    pool->add_option("--config", pf.config, "JSON run configuration; flags override it");
    pool->add_option("--gamma", pf.gamma, "Power-mean exponent");
    pool->add_option("--family", pf.family, "conv or transformer (selects the gamma default)");
    pool->add_option("--k", pf.k, "Number of pooled vectors");
    pool->add_option("--iters", pf.iters, "Iterations");
    pool->add_option("--heads", pf.heads, "Attention heads");
    pool->add_option("--epsilon", pf.epsilon, "Entropic regularizer");
    pool->add_option("--r", pf.r, "Log-sum-exp sharpness");
    pool->add_option("--seed", pf.seed, "Seed for generated weights");
    pool->add_option("--out", pf.out, "Output NPY for the pooled vectors");
    pool->add_option("--attn-out", pf.attn_out, "Output NPY for the attention");
    pool->add_option("--width", pf.width, "Grid width");
    pool->add_option("--height", pf.height, "Grid height");
    pool->add_flag("--full", pf.full, "Use the full (non-simplified) form where one exists");
    pool->add_flag("--no-layernorm", pf.no_layernorm, "Disable LayerNorm in simpool");

    AttnFlags af;
    CLI::App* attn = app.add_subcommand("attnmap", "Threshold an attention map and extract a box");
    attn->add_option("--attn", af.attn, "Attention NPY file")->required();
    attn->add_option("--width", af.width, "Grid width")->required();
    attn->add_option("--height", af.height, "Grid height")->required();
    attn->add_option("--mass", af.mass, "Mass fraction kept")->capture_default_str();
    attn->add_option("--column", af.column, "Attention column to use")->capture_default_str();
    attn->add_option("--pgm", af.pgm, "Write the map as PGM");
    attn->add_option("--mask-pgm", af.mask_pgm, "Write the thresholded mask as PGM");
    attn->add_flag("--bbox", af.bbox, "Print the box of the largest component");

    GradFlags gf;
    CLI::App* grad = app.add_subcommand("gradcheck", "Compare analytic and numeric gradients");
    grad->set_help_flag("--help", "Print this help message and exit");
    grad->add_option("--method", gf.method, "Method (simpool)")->capture_default_str();
    grad->add_option("--d", gf.d, "Channels")->capture_default_str();
    grad->add_option("--p", gf.p, "Spatial positions")->capture_default_str();
    grad->add_option("--gamma", gf.gamma, "Power-mean exponent")->capture_default_str();
    grad->add_option("--h", gf.h, "Finite-difference step")->capture_default_str();
    grad->add_option("--tol", gf.tol, "Relative error tolerance")->capture_default_str();
    grad->add_option("--trials", gf.trials, "Seeded instances")->capture_default_str();
    grad->add_option("--seed", gf.seed, "First seed")->capture_default_str();

    TourFlags tf;
    CLI::App* tour = app.add_subcommand("tournament", "Run every method on synthetic clustered features");
    tour->add_option("--d", tf.opts.d, "Channels")->capture_default_str();
    tour->add_option("--p", tf.opts.p, "Spatial positions")->capture_default_str();
    tour->add_option("--k-clusters", tf.opts.clusters, "Gaussian clusters")->capture_default_str();
    tour->add_option("--trials", tf.opts.trials, "Synthetic inputs per method")->capture_default_str();
    tour->add_option("--seed", tf.opts.seed, "Seed")->capture_default_str();
    tour->add_option("--methods", tf.methods, "Comma-separated methods (default: all)");
    tour->add_option("--out", tf.out, "TSV output path (default: stdout)");
    tour->add_flag("--timing", tf.timing, "Add a wall-time column");

    std::string inspect_path;
    CLI::App* insp = app.add_subcommand("inspect", "Print an NPY header");
    insp->add_option("file", inspect_path, "NPY file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (pool->parsed()) return cmd_pool(pf, *pool);
        if (attn->parsed()) return cmd_attnmap(af);
        if (grad->parsed()) return cmd_gradcheck(gf);
        if (tour->parsed()) return cmd_tournament(tf);
        if (insp->parsed()) return cmd_inspect(inspect_path);
    } catch (const ContractError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}
