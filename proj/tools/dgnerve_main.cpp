// dgnerve command-line tool: parse an input document, run the requested
// computation, write the report.

#include "dgnerve/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

int main(int argc, char** argv) {
    CLI::App app{"dgnerve: derived endomorphisms and deformations of sheaves presented over a cover nerve"};

    std::string input_path, output_path, box_override, model_override;
    bool strict = false;
    int threads = 0;
    unsigned long seed = 0;
    bool seed_given = false;

    app.add_option("--input", input_path, "input document path")->required();
    app.add_option("--output", output_path, "report path (default: [output] section or stdout)");
    app.add_flag("--strict", strict, "exit nonzero on unstable/inconclusive results");
    app.add_option("--threads", threads, "worker threads for piece-level computations");
    auto* seed_opt = app.add_option("--seed", seed, "seed for randomized property suites");
    app.add_option("--box", box_override, "degree box, e.g. -4..4 or -4..4,-3..3");
    app.add_option("--model", model_override, "ext model: endQ | CL | Ch");

    CLI11_PARSE(app, argc, argv);
    seed_given = seed_opt->count() > 0;

    std::ifstream in(input_path);
    if (!in) {
        std::cerr << "error: cannot open input file " << input_path << "\n";
        return 1;
    }
    std::stringstream buf;
    buf << in.rdbuf();

    dgn::InputDocument doc;
    try {
        std::string text = buf.str();
        if (!box_override.empty()) text += "\n[task]\nbox = " + box_override + "\n";
        if (!model_override.empty()) text += "\n[task]\nmodel = " + model_override + "\n";
        doc = dgn::parse_input(text);
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    }
    if (strict) doc.strict = true;
    if (threads > 0) doc.threads = threads;
    if (seed_given) doc.seed = seed;
    if (!output_path.empty()) doc.output_path = output_path;

    dgn::RunResult res = dgn::run(doc);

    if (doc.output_path.empty()) {
        std::cout << res.report;
    } else {
        std::ofstream out(doc.output_path);
        if (!out) {
            std::cerr << "error: cannot write " << doc.output_path << "\n";
            return 1;
        }
        out << res.report;
    }
    return res.exit_code;
}
