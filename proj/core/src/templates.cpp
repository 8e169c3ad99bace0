#include <fstream>
#include <sstream>

#include "camf/agents.hpp"
#include "camf/errors.hpp"
#include "text_util.hpp"

namespace camf {

namespace {

struct EmbeddedTemplate {
  std::string_view agent;
  std::string_view content;
};

// Generated at configure time from core/prompts/*.txt.
constexpr EmbeddedTemplate kEmbedded[] = {
#include "default_templates.inc"
};

std::string file_stem(AgentId id) { return detail::to_lower(to_string(id)); }

// Strips exactly one trailing newline so files can end in LF without the
// prompt growing a blank line.
std::string chomp(std::string_view s) {
  if (!s.empty() && s.back() == '\n') s.remove_suffix(1);
  return std::string(s);
}

}  // namespace

AgentTemplate TemplateSet::parse(std::string_view file_content) {
  const std::string content = detail::normalize_newlines(file_content);
  const std::string_view view(content);
  const auto system_at = view.find("[system]\n");
  const auto user_at = view.find("\n[user]\n");
  if (system_at != 0 || user_at == std::string_view::npos) {
    throw Error("template must start with a [system] line and contain a [user] line");
  }
  AgentTemplate t;
  t.system = chomp(view.substr(9, user_at + 1 - 9));
  t.user = chomp(view.substr(user_at + 8));
  if (t.system.find("[AGENT:") != std::string::npos || t.user.find("[AGENT:") != std::string::npos) {
    throw Error("templates must not contain agent tags; the tag is injected automatically");
  }
  if (detail::is_blank(t.system) || detail::is_blank(t.user)) {
    throw Error("template sections must not be empty");
  }
  return t;
}

const TemplateSet& TemplateSet::defaults() {
  static const TemplateSet set = [] {
    TemplateSet s;
    for (const auto& e : kEmbedded) {
      s.templates_[*agent_from_string(e.agent)] = parse(e.content);
    }
    return s;
  }();
  return set;
}

TemplateSet TemplateSet::from_directory(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error("prompt directory does not exist: " + dir.string());
  }
  TemplateSet s = defaults();
  for (AgentId id : kAllAgents) {
    const auto path = dir / (file_stem(id) + ".txt");
    std::ifstream in(path, std::ios::binary);
    if (!in) continue;
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
      s.set(id, parse(buffer.str()));
    } catch (const Error& e) {
      throw Error(path.string() + ": " + e.what());
    }
  }
  return s;
}

const AgentTemplate& TemplateSet::get(AgentId id) const {
  const auto it = templates_.find(id);
  if (it == templates_.end()) throw Error("no template for agent " + std::string(to_string(id)));
  return it->second;
}

void TemplateSet::set(AgentId id, AgentTemplate tmpl) { templates_[id] = std::move(tmpl); }

AgentSpec TemplateSet::spec(AgentId id, const SamplingParams& sampling) const {
  const auto& t = get(id);
  return AgentSpec{id, t.system, t.user, sampling};
}

std::string TemplateSet::digest() const {
  std::string all;
  for (const auto& [id, t] : templates_) {
    all += to_string(id);
    all += '\0';
    all += t.system;
    all += '\0';
    all += t.user;
    all += '\0';
  }
  return detail::sha256_hex(all);
}

}  // namespace camf
