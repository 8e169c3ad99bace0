#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "camf/gateway.hpp"
#include "config.hpp"

namespace camf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitSampleFailed = 2;
inline constexpr int kExitReplayMiss = 3;

/// The decorated backend plus handles on the layers a command reports on.
struct BackendStack {
  std::shared_ptr<ChatBackend> backend;
  std::shared_ptr<ReplayBackend> replay;
  std::shared_ptr<CachingBackend> cache;
  std::shared_ptr<CassetteRecorder> recorder;
};

/// Replaces every "{model}" in `pattern` with `model`.
std::string expand_model(std::string pattern, const std::string& model);

/// Builds Recorder(Cache(Base)) from the selector in `s.backend`:
/// live | mock:scripted | mock:counting | replay:<path>. `transport` is used
/// by the live backend (nullptr: real HTTP). Throws PreconditionError on a
/// bad selector and AuthError when live credentials are missing.
BackendStack make_backend(const Settings& s, const std::string& model,
                          const std::optional<std::filesystem::path>& record,
                          std::shared_ptr<HttpTransport> transport);

/// Full command-line entry point; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err, std::shared_ptr<HttpTransport> transport = nullptr);

}  // namespace camf::cli
