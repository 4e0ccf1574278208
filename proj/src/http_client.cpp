#include "maskfuse/http_client.hpp"

#include "maskfuse/protocol.hpp"

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

namespace maskfuse {

namespace {

using Clock = std::chrono::steady_clock;

std::string random_key_prefix() {
    std::random_device rd;
    std::ostringstream os;
    os << std::hex << ((static_cast<std::uint64_t>(rd()) << 32) | rd());
    return os.str();
}

void set_timeouts(httplib::Client& cli, double seconds) {
    auto const whole = static_cast<time_t>(seconds);
    auto const micros = static_cast<time_t>((seconds - static_cast<double>(whole)) * 1e6);
    cli.set_connection_timeout(whole, micros);
    cli.set_read_timeout(whole, micros);
    cli.set_write_timeout(whole, micros);
}

template <class Fn> auto decode_or_fail(HttpTransport const& t, Fn&& fn) {
    try {
        return fn();
    } catch (protocol::SchemaError const& e) {
        throw ProviderError(ProviderError::Kind::Schema, t.handle().capability, t.handle().endpoint, e.what());
    }
}

void remember(std::mutex& m, std::string& slot, std::string const& model) {
    if (model.empty()) return;
    std::lock_guard lock(m);
    slot = model;
}

std::string describe(ProviderHandle const& h, std::mutex& m, std::string const& model) {
    std::lock_guard lock(m);
    return "http:" + h.endpoint + (model.empty() ? "" : " (" + model + ")");
}

} // namespace

HttpTransport::HttpTransport(ProviderHandle handle) : handle_(std::move(handle)), key_prefix_(random_key_prefix()) {
    handle_.validate();
    constexpr std::string_view scheme = "http://";
    if (handle_.endpoint.rfind(scheme, 0) != 0)
        throw InvalidArgument(std::string(to_string(handle_.capability)) + ": endpoint must start with http://");
    auto rest = handle_.endpoint.substr(scheme.size());
    auto const slash = rest.find('/');
    host_port_ = std::string(scheme) + rest.substr(0, slash);
    if (slash != std::string::npos) {
        path_prefix_ = rest.substr(slash);
        while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    }
}

void HttpTransport::fail(ProviderError::Kind kind, std::string const& detail, int status) const {
    throw ProviderError(kind, handle_.capability, handle_.endpoint, detail, status);
}

nlohmann::json HttpTransport::post(std::string_view path, nlohmann::json const& body) {
    {
        std::unique_lock lock(mutex_);
        slot_freed_.wait(lock, [&] { return in_flight_ < handle_.concurrency_limit; });
        ++in_flight_;
    }
    struct Release {
        HttpTransport& t;
        ~Release() {
            {
                std::lock_guard lock(t.mutex_);
                --t.in_flight_;
            }
            t.slot_freed_.notify_one();
        }
    } release{*this};

    std::string const payload = body.dump();
    std::string const target = path_prefix_ + std::string(path);
    httplib::Headers headers = {{"Idempotency-Key", key_prefix_ + "-" + std::to_string(next_key_++)}};
    if (!handle_.bearer_token.empty()) headers.emplace("Authorization", "Bearer " + handle_.bearer_token);

    ProviderError::Kind last_kind = ProviderError::Kind::Transport;
    std::string last_detail;
    int last_status = 0;
    int const attempts = 1 + handle_.max_retries;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        last_attempts_ = attempt + 1;
        if (attempt > 0) {
            auto const delay = handle_.backoff_s * std::pow(2.0, attempt - 1);
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
        httplib::Client cli(host_port_);
        set_timeouts(cli, handle_.timeout_s);
        auto const started = Clock::now();
        auto res = cli.Post(target, headers, payload, "application/json");
        if (!res) {
            auto const elapsed = std::chrono::duration<double>(Clock::now() - started).count();
            auto const err = res.error();
            bool const timed_out = err == httplib::Error::ConnectionTimeout ||
                                   ((err == httplib::Error::Read || err == httplib::Error::Write) &&
                                    elapsed >= 0.9 * handle_.timeout_s);
            last_kind = timed_out ? ProviderError::Kind::Timeout : ProviderError::Kind::Transport;
            last_detail = httplib::to_string(err);
            last_status = 0;
            continue;
        }
        if (res->status >= 500) {
            last_kind = ProviderError::Kind::Status;
            last_detail = res->body.substr(0, 200);
            last_status = res->status;
            continue;
        }
        if (res->status != 200) fail(ProviderError::Kind::Status, res->body.substr(0, 200), res->status);

        auto doc = nlohmann::json::parse(res->body, nullptr, false);
        if (doc.is_discarded() || !doc.is_object()) fail(ProviderError::Kind::Schema, "response is not a JSON object");
        return doc;
    }
    fail(last_kind, last_detail + " after " + std::to_string(attempts) + " attempts", last_status);
}

ProviderMaps HttpProbabilityMapProvider::probability_maps(RgbImage const& image, std::span<const std::string> classes,
                                                          int long_side) {
    protocol::ProbabilityMapRequest req{image, {classes.begin(), classes.end()}, long_side};
    auto const doc = transport_.post(protocol::kProbabilityMapPath, protocol::to_json(req));
    auto resp = decode_or_fail(transport_, [&] { return protocol::parse_probability_map_response(doc); });
    if (resp.maps.size() != classes.size()) {
        throw ProviderError(ProviderError::Kind::Schema, Capability::ProbabilityMap, transport_.handle().endpoint,
                            std::to_string(resp.maps.size()) + " maps for " + std::to_string(classes.size()) +
                                " classes");
    }
    remember(model_mutex_, model_, resp.model);
    return {resp.width, resp.height, std::move(resp.maps)};
}

std::string HttpProbabilityMapProvider::provenance() const {
    return describe(transport_.handle(), model_mutex_, model_);
}

std::vector<BinaryMask> HttpMaskProposalProvider::propose(RgbImage const& image, int grid_n) {
    auto const doc = transport_.post(protocol::kMaskProposalsPath, protocol::to_json(protocol::MaskProposalRequest{image, grid_n}));
    auto resp = decode_or_fail(transport_, [&] { return protocol::parse_mask_proposal_response(doc); });
    for (auto const& m : resp.masks) {
        if (m.width() != image.width || m.height() != image.height)
            throw ProviderError(ProviderError::Kind::Schema, Capability::MaskProposals, transport_.handle().endpoint,
                                "proposal size differs from the image");
    }
    remember(model_mutex_, model_, resp.model);
    return std::move(resp.masks);
}

std::string HttpMaskProposalProvider::provenance() const {
    return describe(transport_.handle(), model_mutex_, model_);
}

BinaryMask HttpSegmenter::segment(RgbImage const& image, ClickSet const& clicks) {
    auto const doc = transport_.post(protocol::kSegmentPath, protocol::to_json(protocol::SegmentRequest{image, clicks}));
    auto resp = decode_or_fail(transport_, [&] { return protocol::parse_segment_response(doc); });
    if (resp.mask.width() != image.width || resp.mask.height() != image.height)
        throw ProviderError(ProviderError::Kind::Schema, Capability::PromptableSegment, transport_.handle().endpoint,
                            "mask size differs from the image");
    remember(model_mutex_, model_, resp.model);
    return std::move(resp.mask);
}

std::string HttpSegmenter::provenance() const { return describe(transport_.handle(), model_mutex_, model_); }

std::string HttpClickSuggester::suggest(RgbImage const& image, std::string_view question, int max_clicks) {
    protocol::ClicksRequest req{image, std::string(question), max_clicks};
    auto const doc = transport_.post(protocol::kClicksPath, protocol::to_json(req));
    auto resp = decode_or_fail(transport_, [&] { return protocol::parse_clicks_response(doc); });
    remember(model_mutex_, model_, resp.model);
    return std::move(resp.raw_text);
}

std::string HttpClickSuggester::provenance() const { return describe(transport_.handle(), model_mutex_, model_); }

} // namespace maskfuse
