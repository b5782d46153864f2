#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "gradcalc/dispatch.hpp"

int main(int argc, char** argv) {
    CLI::App app{"exact differential calculus over graded commutative algebras"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "parse a workspace file and execute its checks");
    std::string file;
    std::string signs = "trivial";
    std::string format = "text";
    uint64_t seed = 0;
    int degree_bound = 2;
    bool strict_tuples = false;
    run->add_option("file", file, "workspace file")->required();
    run->add_option("--seed", seed, "seed for randomized cross-checks")
        ->envname("GRADCALC_SEED");
    run->add_option("--signs", signs, "graded commutativity convention")
        ->check(CLI::IsMember({"trivial", "koszul"}));
    run->add_option("--degree-bound", degree_bound,
                    "Christoffel/kernel degree bound for bounded searches")
        ->check(CLI::Range(0, 6));
    run->add_option("--format", format, "report format")
        ->check(CLI::IsMember({"text", "structured"}));
    run->add_flag("--strict-tuples", strict_tuples,
                  "check all non-decreasing generator tuples in order-k relations");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    std::ifstream in(file, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot open '" << file << "'\n";
        return 1;
    }
    std::stringstream buf;
    buf << in.rdbuf();

    gradcalc::RunOptions opts;
    opts.seed = seed;
    opts.signs = signs == "koszul" ? gradcalc::SignConvention::koszul
                                   : gradcalc::SignConvention::trivial;
    opts.degree_bound = degree_bound;
    opts.strict_tuples = strict_tuples;
    gradcalc::ReportFormat fmt = format == "structured" ? gradcalc::ReportFormat::structured
                                                        : gradcalc::ReportFormat::text;

    gradcalc::Workspace ws;
    try {
        ws = gradcalc::parse_workspace(buf.str(), opts.signs);
    } catch (const gradcalc::dsl_error& e) {
        std::cerr << file << ":" << e.line() << ":" << e.col() << ": error: " << e.what()
                  << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << file << ": error: " << e.what() << "\n";
        return 1;
    }

    std::vector<gradcalc::CheckReport> reports;
    for (const auto& cmd : ws.commands()) {
        reports.push_back(gradcalc::run_command(ws, cmd, opts));
        std::cout << gradcalc::emit_report(reports.back(), fmt) << "\n";
    }
    return gradcalc::exit_code_for(reports);
}
