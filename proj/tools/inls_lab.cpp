#include <cstdio>

int main() {
  std::puts("inls_lab: placeholder");
  return 0;
}
