#include "graphchain/chain.hpp"

#include "graphchain/detail/text.hpp"
#include "graphchain/errors.hpp"

namespace graphchain {

const Binding* ApiCall::arg(std::string_view name) const {
  for (const auto& [k, v] : args)
    if (k == name) return &v;
  return nullptr;
}

std::vector<std::string> ApiChain::api_ids() const {
  std::vector<std::string> ids;
  ids.reserve(steps.size());
  for (const auto& s : steps) ids.push_back(s.api);
  return ids;
}

ApiChain chain_from_ids(const std::vector<std::string>& ids) {
  ApiChain c;
  for (const auto& id : ids) c.steps.push_back(ApiCall{id, {}});
  return c;
}

void validate_chain(const ApiChain& chain) {
  if (!chain.partial && chain.empty()) throw ValidationError("a full chain needs at least one step");
  for (std::size_t i = 0; i < chain.steps.size(); ++i) {
    const auto& call = chain.steps[i];
    if (call.api.empty() || detail::has_space(call.api)) throw ValidationError("invalid api id at step " + std::to_string(i));
    if (call.api == kEndApi) throw ValidationError("end marker inside a chain at step " + std::to_string(i));
    for (const auto& [name, value] : call.args)
      if (auto ref = std::get_if<StepRef>(&value); ref && ref->step >= i)
        throw ValidationError("step " + std::to_string(i) + " argument '" + name + "' references step " +
                              std::to_string(ref->step) + ", which is not earlier");
  }
}

ApiCall parse_call(std::string_view line) {
  auto tok = detail::split_ws(line);
  if (tok.empty()) throw ParseError(0, "empty chain step");
  ApiCall call{std::string(tok[0]), {}};
  if (call.api.find('=') != std::string::npos) throw ParseError(0, "step must start with an api id");
  for (std::size_t i = 1; i < tok.size(); ++i) {
    auto eq = tok[i].find('=');
    if (eq == std::string_view::npos || eq == 0) throw ParseError(0, "expected <arg>=<value>, got '" + std::string(tok[i]) + "'");
    std::string name(tok[i].substr(0, eq));
    if (call.arg(name)) throw ParseError(0, "argument '" + name + "' given twice");
    auto value = tok[i].substr(eq + 1);
    if (!value.empty() && value.front() == '$') {
      auto k = detail::parse_u64(value.substr(1));
      if (!k) throw ParseError(0, "invalid step reference '" + std::string(value) + "'");
      call.args.emplace_back(std::move(name), StepRef{static_cast<std::size_t>(*k)});
    } else {
      call.args.emplace_back(std::move(name), std::string(value));
    }
  }
  return call;
}

std::string format_call(const ApiCall& call) {
  std::string out = call.api;
  for (const auto& [name, value] : call.args) {
    out += " " + name + "=";
    if (auto ref = std::get_if<StepRef>(&value))
      out += "$" + std::to_string(ref->step);
    else
      out += std::get<std::string>(value);
  }
  return out;
}

ApiChain parse_chain(std::string_view text) {
  ApiChain chain;
  auto lines = detail::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto line = detail::trim(lines[i]);
    if (line.empty() || line.front() == '#') continue;
    try {
      chain.steps.push_back(parse_call(line));
    } catch (const ParseError& e) {
      throw ParseError(i + 1, e.what());
    }
  }
  validate_chain(chain);
  return chain;
}

std::string serialize_chain(const ApiChain& chain) {
  std::string out;
  for (const auto& s : chain.steps) out += format_call(s) + "\n";
  return out;
}

ApiChain parse_inline_chain(std::string_view text) {
  ApiChain chain;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto semi = text.find(';', start);
    auto part = detail::trim(text.substr(start, semi == std::string_view::npos ? std::string_view::npos : semi - start));
    if (!part.empty()) chain.steps.push_back(parse_call(part));
    if (semi == std::string_view::npos) break;
    start = semi + 1;
  }
  validate_chain(chain);
  return chain;
}

std::string format_inline_chain(const ApiChain& chain) {
  std::string out;
  for (std::size_t i = 0; i < chain.steps.size(); ++i) out += (i ? ";" : "") + format_call(chain.steps[i]);
  return out;
}

}  // namespace graphchain
