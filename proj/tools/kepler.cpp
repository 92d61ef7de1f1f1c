// kepler: decision procedure for word equations with regular membership and
// length constraints.
//
//   kepler solve FILE [options]     decide an SMT-LIB script
//   kepler gen-bench --out DIR ...  generate the quad-* benchmark family
//   kepler oracle FILE --max-len L  brute-force ground truth (testing aid)
//
// Exit codes: 0 sat, 1 unsat, 2 unknown, 3 error.

#include "kepler/frontend.hpp"
#include "kepler/normalize.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw kepler::Error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int run_solve(const std::string& file, const kepler::SolveConfig& cfg, bool want_model) {
    kepler::Session session;
    kepler::ParsedScript script = kepler::parse_smtlib(session, read_file(file));
    kepler::NormalizedFormula nf = kepler::normalize(session, script.formula);
    kepler::SolveResult result = kepler::solve(session, nf, cfg);
    switch (result.verdict) {
        case kepler::Verdict::Sat:
            std::cout << "sat\n";
            if (want_model || script.get_model)
                std::cout << kepler::model_to_smtlib(session, result.model);
            return 0;
        case kepler::Verdict::Unsat:
            std::cout << "unsat\n";
            return 1;
        case kepler::Verdict::Unknown:
            std::cout << "unknown\n";
            if (!result.reason.empty()) std::cerr << "; reason: " << result.reason << "\n";
            return 2;
    }
    return 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kepler string solver"};
    app.require_subcommand(1);

    std::string file, out_dir;
    kepler::SolveConfig cfg;
    bool want_model = false;
    std::string backend = "internal";
    int phases = 2, count = 60, max_len = 4;
    double timeout_s = 30.0;

    auto* solve_cmd = app.add_subcommand("solve", "decide an SMT-LIB script");
    solve_cmd->add_option("file", file)->required();
    solve_cmd->add_option("--max-depth", cfg.tree_budget.max_depth);
    solve_cmd->add_option("--max-unroll", cfg.widen.unroll_cap);
    solve_cmd->add_option("--timeout", timeout_s, "tree construction wall time (s)");
    solve_cmd->add_option("--dump-tree", cfg.dump_tree);
    solve_cmd->add_option("--dump-cfg", cfg.dump_cfg);
    solve_cmd->add_option("--dump-chc", cfg.dump_chc);
    solve_cmd->add_option("--dump-lia", cfg.dump_lia);
    solve_cmd->add_option("--backend", backend)->check(CLI::IsMember({"internal", "export-only"}));
    solve_cmd->add_flag("--model", want_model);

    auto* bench_cmd = app.add_subcommand("gen-bench", "generate quad-* benchmarks");
    bench_cmd->add_option("--out", out_dir)->required();
    bench_cmd->add_option("--phases", phases)->check(CLI::Range(1, 3));
    bench_cmd->add_option("--count", count);

    auto* oracle_cmd = app.add_subcommand("oracle", "brute-force ground truth");
    oracle_cmd->add_option("file", file)->required();
    oracle_cmd->add_option("--max-len", max_len);

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve_cmd->parsed()) {
            cfg.tree_budget.wall_time_s = timeout_s;
            cfg.export_only = backend == "export-only";
            cfg.want_model = want_model;
            return run_solve(file, cfg, want_model);
        }
        if (bench_cmd->parsed()) {
            auto files = kepler::gen_bench(out_dir, phases, count);
            std::cout << files.size() << " files written to " << out_dir << "\n";
            return 0;
        }
        if (oracle_cmd->parsed()) {
            kepler::Session session;
            kepler::ParsedScript script = kepler::parse_smtlib(session, read_file(file));
            kepler::NormalizedFormula nf = kepler::normalize(session, script.formula);
            if (kepler::oracle(session, nf, max_len) == kepler::OracleVerdict::Sat) {
                std::cout << "sat\n";
                return 0;
            }
            std::cout << "unsat-within-bound " << max_len << "\n";
            return 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 3;
}
