#pragma once

#include <string>
#include <vector>

namespace por {

struct SelfTestLine {
    std::string name;
    bool ok = false;
    std::string detail;
};

/// Published test vectors: the GF(4) (3,2,2) codeword table and its erasure
/// example, and the two worked SW instances over Z_101.
std::vector<SelfTestLine> run_selftest();

}  // namespace por
