// Writes the bundled default codebook to a file.

#include <cstdio>
#include <fstream>
#include <string>

#include "CLI11.hpp"
#include "scma/codebook.hpp"

int main(int argc, char** argv) {
    CLI::App app{"write the built-in SCMA codebook to a file"};
    std::string out_path;
    app.add_option("-o,--out", out_path, "output path")->required();
    CLI11_PARSE(app, argc, argv);

    std::ofstream out(out_path);
    if (!out) {
        std::fprintf(stderr, "error: cannot write %s\n", out_path.c_str());
        return 1;
    }
    out << "# SCMA codebook: J=6 users on K=4 resources, M=4, N=2.\n"
           "# Supports are the six resource pairs; colliding users are phase rotated.\n";
    scma::save_codebook(scma::make_default_codebook(), out);
    std::printf("wrote %s\n", out_path.c_str());
    return 0;
}
