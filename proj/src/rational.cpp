#include "ballsim/rational.hpp"

namespace ballsim {

std::string int128_to_string(int128 v) {
    if (v == 0) return "0";
    bool neg = v < 0;
    // Careful with INT128_MIN: negate digit by digit via unsigned.
    unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
    std::string s;
    while (u > 0) {
        s.push_back(static_cast<char>('0' + static_cast<int>(u % 10)));
        u /= 10;
    }
    if (neg) s.push_back('-');
    std::string out(s.rbegin(), s.rend());
    return out;
}

}  // namespace ballsim
