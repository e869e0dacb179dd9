#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace fedwh_test {

inline std::string fixture_dir() { return FEDWH_FIXTURE_DIR; }

inline std::string hotel_dir() { return fixture_dir() + "/hotel"; }

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("test fixture missing: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

}  // namespace fedwh_test
