#include <malloc.h>

#include <iostream>

#include "daylight/cli/cli.hpp"

int main(int argc, char** argv) {
  // Keep large activation buffers in the heap between batches instead of
  // returning them to the OS.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  return illum::cli::dispatch(argc, argv, std::cout, std::cerr);
}
