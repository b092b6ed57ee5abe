#include <iostream>

#include "driver.hpp"

int main(int argc, char** argv) {
  return flakilab::driver::main_entry(argc, argv, std::cout, std::cerr);
}
