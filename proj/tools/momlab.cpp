#include "momlab/linalg.hpp"

#include <cstdio>

int main() {
  std::puts("momlab: cli not wired yet");
  return 0;
}
