// Shared enumerations for protocols, bases and clone roles.

#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace seqclone {

enum class Protocol { BB84, SixState };

// Single-qubit measurement/preparation basis. Y is used by the six-state
// protocol only.
enum class Basis { Z, X, Y };

// IndependentBases draws a basis per qubit; CorrelatedBases draws one basis
// for the whole sequence.
enum class BasisMode { Independent, Correlated };

// E is the eavesdropper's clone, B the one forwarded to Bob.
enum class Clone { E, B };

std::span<const Basis> protocol_bases(Protocol p);

std::string_view to_string(Protocol p);
std::string_view to_string(Basis b);
std::string_view to_string(BasisMode m);
std::string_view to_string(Clone c);

// Accepts the CLI spellings: "bb84", "six-state" / "independent", "correlated".
Protocol parse_protocol(std::string_view s);
BasisMode parse_mode(std::string_view s);

} // namespace seqclone
