// SPDX-License-Identifier: MIT
#pragma once

#include <string>

#include "singlab/network.hpp"

namespace singlab {

/// Versioned JSON text format: activation descriptor, layer shapes,
/// row-major dense weights, biases, optional clip bound. Serializing and
/// re-parsing reproduces every finite double bit-exactly.
std::string network_to_json(const Network& net);
Network network_from_json(const std::string& text);

void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

}  // namespace singlab
