#pragma once

#include <iosfwd>
#include <string>

#include "ubopf/network.hpp"

namespace ubopf {

/// Parses and validates a network file (JSON schema, quantities in SI).
/// Throws ParseError on schema problems, ValidationError on invariant
/// violations.
Network load_network(const std::string& path);
Network read_network(std::istream& in, const std::string& origin = "<stream>");

/// Serializes a network back to the same JSON schema, preserving element
/// order (and therefore the (node, phase) -> matrix-row map).
void save_network(const Network& network, const std::string& path);
std::string network_to_json(const Network& network);

/// Stable 64-bit FNV-1a hash of the canonical serialized form, used to
/// record provenance in study results.
std::string network_hash(const Network& network);

}  // namespace ubopf
