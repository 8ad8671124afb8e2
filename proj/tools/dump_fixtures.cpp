// Writes the registry's coin files into a fixtures directory (default
// "fixtures"), one JSON document per sub-case.
#include <oqw/io.hpp>
#include <oqw/registry.hpp>

#include <iostream>
#include <string>

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "fixtures";
  try {
    for (const oqw::RegistryCase& c : oqw::registry()) {
      const std::string path = dir + "/" + c.fixture_name() + ".json";
      oqw::save_coin_file(c.spec, path);
      std::cout << path << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
