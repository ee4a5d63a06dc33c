#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include "psilab/errors.hpp"
#include "psilab/linalg.hpp"

int main(int argc, char** argv) {
  psilab::configure_blas(argv);
  doctest::Context context(argc, argv);
  return context.run();
}
