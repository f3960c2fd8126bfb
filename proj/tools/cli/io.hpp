#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "zncount/spectrum.hpp"
#include "zncount/transfer.hpp"
#include "zncount/zn_core.hpp"

namespace zncount::cli {

using Json = nlohmann::ordered_json;

/// Malformed input file; the message carries line or field context.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// {"modulus": N, "values": [...]} or CSV rows "index,value" (optional header).
CyclicFunction parse_function(const std::string& text, const std::string& source);
CyclicFunction load_function(const std::string& path);

std::string function_to_json(const CyclicFunction& f);
void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

Json plan_to_json(const TransferPlan& plan);
TransferPlan plan_from_json(const Json& j);

Json hypothesis_to_json(const HypothesisReport& r);
Json chain_to_json(const ChainReport& r);

}  // namespace zncount::cli
