#include "gcflow/cli.hpp"

int main(int argc, char** argv) {
  return gcflow::cli_main(argc, argv);
}
