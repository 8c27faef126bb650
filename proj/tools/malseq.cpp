#include <iostream>

#include "malseq/pipeline.hpp"

int main() {
  std::cout << "placeholder\n";
  return 0;
}
