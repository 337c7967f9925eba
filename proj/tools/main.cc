#include <iostream>

#include "commands.h"

int main(int argc, char** argv) {
  return fopkit::cli::main_entry(argc, argv, std::cout, std::cerr);
}
