#pragma once

#include <filesystem>

#include "cotrep/model/backend.hpp"
#include "cotrep/model/rcad.hpp"

namespace cotrep {

// Serves recorded activations from an RCAD v1 dump. represent(prompt) looks
// the prompt up by exact header text; generation is unsupported.
class PlaybackBackend final : public Backend {
 public:
  explicit PlaybackBackend(const std::filesystem::path& dump_path);
  explicit PlaybackBackend(RcadFile file);

  const BackendDescriptor& descriptor() const override { return descriptor_; }
  TokenSequence tokenize(std::string_view text) const override;
  ActivationTensor represent(std::string_view prompt) override;
  GenerationResult generate(std::string_view prompt, const Hook& hook,
                            const GenerationOptions& options) override;
  std::unique_ptr<Backend> clone() const override;

  const RcadFile& file() const noexcept { return *file_; }

 private:
  const RcadSample& find(std::string_view text) const;

  std::shared_ptr<const RcadFile> file_;
  BackendDescriptor descriptor_;
};

}  // namespace cotrep
