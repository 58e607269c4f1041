#include <vector>

#include "lemma/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return lemma::cli::run(std::move(args));
}
