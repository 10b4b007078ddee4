#include "contextsim/cli.hpp"

int main(int argc, char** argv) {
    return contextsim::cli::run(argc, argv);
}
