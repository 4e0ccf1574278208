#pragma once

#include "maskfuse/providers.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <condition_variable>
#include <mutex>
#include <string>
#include <string_view>

namespace maskfuse {

/// One POST per call against `handle.endpoint + path`.
///
/// Transport failures, timeouts and 5xx answers are retried `max_retries`
/// times with exponential backoff; 4xx answers and malformed bodies fail at
/// once. The serialized request is reused verbatim across retries and carries
/// a per-call `Idempotency-Key`. At most `concurrency_limit` calls are in
/// flight per transport.
class HttpTransport {
  public:
    explicit HttpTransport(ProviderHandle handle);

    nlohmann::json post(std::string_view path, nlohmann::json const& body);

    ProviderHandle const& handle() const { return handle_; }
    /// Attempts made by the most recent call (1 + retries used).
    int last_attempts() const { return last_attempts_.load(); }

  private:
    [[noreturn]] void fail(ProviderError::Kind kind, std::string const& detail, int status = 0) const;

    ProviderHandle handle_;
    std::string host_port_;
    std::string path_prefix_;
    std::string key_prefix_;
    std::atomic<std::uint64_t> next_key_{0};
    std::atomic<int> last_attempts_{0};

    std::mutex mutex_;
    std::condition_variable slot_freed_;
    int in_flight_ = 0;
};

class HttpProbabilityMapProvider final : public ProbabilityMapProvider {
  public:
    explicit HttpProbabilityMapProvider(ProviderHandle handle) : transport_(std::move(handle)) {}
    ProviderMaps probability_maps(RgbImage const& image, std::span<const std::string> classes, int long_side) override;
    std::string provenance() const override;

  private:
    HttpTransport transport_;
    mutable std::mutex model_mutex_;
    std::string model_;
};

class HttpMaskProposalProvider final : public MaskProposalProvider {
  public:
    explicit HttpMaskProposalProvider(ProviderHandle handle) : transport_(std::move(handle)) {}
    std::vector<BinaryMask> propose(RgbImage const& image, int grid_n) override;
    std::string provenance() const override;

  private:
    HttpTransport transport_;
    mutable std::mutex model_mutex_;
    std::string model_;
};

class HttpSegmenter final : public PromptableSegmenter {
  public:
    explicit HttpSegmenter(ProviderHandle handle) : transport_(std::move(handle)) {}
    BinaryMask segment(RgbImage const& image, ClickSet const& clicks) override;
    std::string provenance() const override;

  private:
    HttpTransport transport_;
    mutable std::mutex model_mutex_;
    std::string model_;
};

class HttpClickSuggester final : public ClickSuggester {
  public:
    explicit HttpClickSuggester(ProviderHandle handle) : transport_(std::move(handle)) {}
    std::string suggest(RgbImage const& image, std::string_view question, int max_clicks) override;
    std::string provenance() const override;

  private:
    HttpTransport transport_;
    mutable std::mutex model_mutex_;
    std::string model_;
};

} // namespace maskfuse
