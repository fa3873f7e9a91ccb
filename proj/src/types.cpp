#include "seqclone/types.hpp"

#include <array>
#include <string>

namespace seqclone {

namespace {
constexpr std::array<Basis, 2> kBB84Bases{Basis::Z, Basis::X};
constexpr std::array<Basis, 3> kSixStateBases{Basis::Z, Basis::X, Basis::Y};
} // namespace

std::span<const Basis> protocol_bases(Protocol p) {
    if (p == Protocol::BB84) {
        return kBB84Bases;
    }
    return kSixStateBases;
}

std::string_view to_string(Protocol p) {
    return p == Protocol::BB84 ? "bb84" : "six-state";
}

std::string_view to_string(Basis b) {
    switch (b) {
    case Basis::Z:
        return "Z";
    case Basis::X:
        return "X";
    case Basis::Y:
        return "Y";
    }
    return "?";
}

std::string_view to_string(BasisMode m) {
    return m == BasisMode::Independent ? "independent" : "correlated";
}

std::string_view to_string(Clone c) {
    return c == Clone::E ? "E" : "B";
}

Protocol parse_protocol(std::string_view s) {
    if (s == "bb84") {
        return Protocol::BB84;
    }
    if (s == "six-state") {
        return Protocol::SixState;
    }
    throw std::invalid_argument("unknown protocol '" + std::string(s) + "' (expected bb84 or six-state)");
}

BasisMode parse_mode(std::string_view s) {
    if (s == "independent") {
        return BasisMode::Independent;
    }
    if (s == "correlated") {
        return BasisMode::Correlated;
    }
    throw std::invalid_argument("unknown basis mode '" + std::string(s) +
                                "' (expected independent or correlated)");
}

} // namespace seqclone
