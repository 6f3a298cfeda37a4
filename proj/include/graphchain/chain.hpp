#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace graphchain {

// Terminates a chain during planning; never stored in a full chain.
inline constexpr std::string_view kEndApi = "__end__";

// Reference to the output of an earlier step (0-based), written `$k`.
struct StepRef {
  std::size_t step = 0;
  friend bool operator==(const StepRef&, const StepRef&) = default;
};

using Binding = std::variant<std::string, StepRef>;

struct ApiCall {
  std::string api;
  std::vector<std::pair<std::string, Binding>> args;  // in written order

  const Binding* arg(std::string_view name) const;
  friend bool operator==(const ApiCall&, const ApiCall&) = default;
};

struct ApiChain {
  std::vector<ApiCall> steps;
  bool partial = false;

  std::size_t size() const noexcept { return steps.size(); }
  bool empty() const noexcept { return steps.empty(); }
  std::vector<std::string> api_ids() const;

  friend bool operator==(const ApiChain&, const ApiChain&) = default;
};

ApiChain chain_from_ids(const std::vector<std::string>& ids);

// Throws ValidationError when a full chain is empty or a `$k` does not point
// to an earlier step.
void validate_chain(const ApiChain& chain);

// One step: `<api-id> [<arg>=<value|$k>]...`
ApiCall parse_call(std::string_view line);
std::string format_call(const ApiCall& call);

// Chain file: one step per line; blank and `#` lines skipped.
ApiChain parse_chain(std::string_view text);
std::string serialize_chain(const ApiChain& chain);

// Inline form used in exemplar logs: steps joined by ';'.
ApiChain parse_inline_chain(std::string_view text);
std::string format_inline_chain(const ApiChain& chain);

}  // namespace graphchain
