#include "gmfusion_cli.hpp"

int main(int argc, char** argv)
{
  return gmfusion::cli::run(argc, argv);
}
