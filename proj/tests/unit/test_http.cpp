#include "maskfuse/http_client.hpp"
#include "maskfuse/protocol.hpp"

#include "../support/mock_server.hpp"
#include "../support/oracles.hpp"

#include <doctest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <future>
#include <set>

using namespace maskfuse;

namespace {

ProviderHandle http_handle(Capability cap, std::string endpoint) {
    ProviderHandle h;
    h.capability = cap;
    h.backend = Backend::Http;
    h.endpoint = std::move(endpoint);
    h.timeout_s = 2.0;
    h.backoff_s = 0.01;
    return h;
}

Scene small_scene() {
    SceneSpec spec;
    spec.width = 48;
    spec.height = 32;
    spec.class_count = 3;
    SceneShape a;
    a.cls = 1;
    a.rect = {2, 2, 12, 10};
    SceneShape b;
    b.cls = 2;
    b.kind = SceneShape::Kind::Disk;
    b.cx = 32;
    b.cy = 18;
    b.radius = 8;
    spec.shapes = {a, b};
    return make_scene(spec);
}

ProviderError::Kind kind_of(std::function<void()> const& fn) {
    try {
        fn();
    } catch (ProviderError const& e) {
        return e.kind();
    }
    FAIL("no ProviderError thrown");
    return ProviderError::Kind::Transport;
}

} // namespace

TEST_CASE("protocol documents round trip") {
    auto const scene = small_scene();
    using namespace protocol;

    auto const pm = parse_probability_map_request(to_json(ProbabilityMapRequest{scene.image, {"bg", "a"}, 448}));
    CHECK(pm.image == scene.image);
    CHECK(pm.classes == std::vector<std::string>{"bg", "a"});
    CHECK(pm.long_side == 448);

    auto const pr = parse_probability_map_response(to_json(ProbabilityMapResponse{48, 32, scene.maps, "m"}));
    CHECK(pr.maps == scene.maps);
    CHECK(pr.model == "m");

    auto const mp = parse_mask_proposal_response(to_json(MaskProposalResponse{scene.proposals.proposals, ""}));
    CHECK(mp.masks == scene.proposals.proposals);
    CHECK(parse_mask_proposal_request(to_json(MaskProposalRequest{scene.image, 29})).grid_n == 29);

    ClickSet clicks = parse_clicks_text("Positive: [(3, 4)], Negative: [(40, 2)]");
    auto const sr = parse_segment_request(to_json(SegmentRequest{scene.image, clicks}));
    CHECK(sr.clicks == clicks);
    auto const mask = scene.gt.mask_of(1);
    CHECK(parse_segment_response(to_json(SegmentResponse{mask, ""})).mask == mask);

    auto const cr = parse_clicks_request(to_json(ClicksRequest{scene.image, "the pond", 6}));
    CHECK(cr.question == "the pond");
    CHECK(cr.max_clicks == 6);
    CHECK(parse_clicks_response(to_json(ClicksResponse{"Positive: []", ""})).raw_text == "Positive: []");

    CHECK_THROWS_AS(parse_clicks_response(nlohmann::json::object()), SchemaError);
    CHECK_THROWS_AS(parse_clicks_request({{"image_png_b64", "!!"}, {"question", "q"}, {"max_clicks", 1}}), SchemaError);
    CHECK_THROWS_AS(parse_probability_map_response({{"width", 2}, {"height", 1}, {"maps", {"AAAA"}}}), SchemaError);
    CHECK_THROWS_AS(parse_segment_request({{"image_png_b64", ""}, {"positive", {{1}}}, {"negative", nlohmann::json::array()}}),
                    SchemaError);
}

TEST_CASE("http providers match the oracle through the mock server") {
    mock::Server server;
    auto const scene = small_scene();
    std::vector<std::string> const classes = {"background", "field", "pond"};

    HttpProbabilityMapProvider prob(http_handle(Capability::ProbabilityMap, server.endpoint()));
    auto const maps = prob.probability_maps(scene.image, classes, 448);
    CHECK(maps.width == 48);
    CHECK(maps.maps == scene.maps);
    CHECK(prob.provenance().find("mock-clip") != std::string::npos);

    HttpMaskProposalProvider props(http_handle(Capability::MaskProposals, server.endpoint()));
    auto const got = props.propose(scene.image, 29);
    CHECK(got.size() == 4);
    CHECK(got[0] == scene.gt.mask_of(1));

    HttpSegmenter seg(http_handle(Capability::PromptableSegment, server.endpoint() + "/"));
    auto const clicks = parse_clicks_text("Positive: [(32, 18), (5, 5)], Negative: [(40, 2)]");
    CHECK(seg.segment(scene.image, clicks) == mask_union(std::vector{scene.gt.mask_of(1), scene.gt.mask_of(2)}));

    HttpClickSuggester sugg(http_handle(Capability::ClickSuggest, server.endpoint()));
    auto const text = sugg.suggest(scene.image, "everything", 6);
    CHECK(parse_clicks_text(text).positives.size() == 2);
    server.set_canned_answer("Positive: [(1, 2)]");
    CHECK(sugg.suggest(scene.image, "q", 6) == "Positive: [(1, 2)]");

    std::set<std::string> paths;
    for (auto const& s : server.seen()) paths.insert(s.path);
    CHECK(paths == std::set<std::string>{"/v1/probability-map", "/v1/mask-proposals", "/v1/segment", "/v1/clicks"});
}

TEST_CASE("retries on 5xx and timeouts") {
    mock::Server server;
    auto const scene = small_scene();
    ClickSet clicks = parse_clicks_text("Positive: [(5, 5)]");

    SUBCASE("two 500s then success") {
        HttpSegmenter seg(http_handle(Capability::PromptableSegment, server.endpoint()));
        server.inject(mock::Fault::Status500, 2);
        CHECK(seg.segment(scene.image, clicks) == scene.gt.mask_of(1));
        auto const seen = server.seen();
        REQUIRE(seen.size() == 3);
        CHECK(seen[0].idempotency_key == seen[1].idempotency_key);
        CHECK(seen[1].idempotency_key == seen[2].idempotency_key);
        CHECK(!seen[0].idempotency_key.empty());
    }
    SUBCASE("three 500s fail with a typed status error") {
        HttpSegmenter seg(http_handle(Capability::PromptableSegment, server.endpoint()));
        server.inject(mock::Fault::Status500, 3);
        try {
            seg.segment(scene.image, clicks);
            FAIL("expected failure");
        } catch (ProviderError const& e) {
            CHECK(e.kind() == ProviderError::Kind::Status);
            CHECK(e.status() == 500);
            CHECK(e.capability() == Capability::PromptableSegment);
            CHECK(e.endpoint() == server.endpoint());
        }
        CHECK(server.seen().size() == 3);
    }
    SUBCASE("4xx is not retried") {
        HttpSegmenter seg(http_handle(Capability::PromptableSegment, server.endpoint()));
        server.inject(mock::Fault::Status400, 5);
        CHECK(kind_of([&] { seg.segment(scene.image, clicks); }) == ProviderError::Kind::Status);
        CHECK(server.seen().size() == 1);
    }
    SUBCASE("slow answers count as timeouts and are retried") {
        auto h = http_handle(Capability::PromptableSegment, server.endpoint());
        h.timeout_s = 0.2;
        HttpSegmenter seg(h);
        server.inject(mock::Fault::Delay, 2, 600);
        CHECK(seg.segment(scene.image, clicks) == scene.gt.mask_of(1));
        CHECK(server.seen().size() == 3);

        server.inject(mock::Fault::Delay, 3, 600);
        CHECK(kind_of([&] { seg.segment(scene.image, clicks); }) == ProviderError::Kind::Timeout);
    }
    SUBCASE("malformed bodies fail at once") {
        HttpClickSuggester sugg(http_handle(Capability::ClickSuggest, server.endpoint()));
        server.inject(mock::Fault::Garbage, 1);
        CHECK(kind_of([&] { sugg.suggest(scene.image, "q", 3); }) == ProviderError::Kind::Schema);
        server.inject(mock::Fault::WrongShape, 1);
        CHECK(kind_of([&] { sugg.suggest(scene.image, "q", 3); }) == ProviderError::Kind::Schema);
        CHECK(server.seen().size() == 2);
    }
}

TEST_CASE("headers and concurrency") {
    mock::Server server;
    auto const scene = small_scene();
    auto h = http_handle(Capability::ClickSuggest, server.endpoint());
    h.bearer_token = "tok123";
    h.concurrency_limit = 2;
    HttpClickSuggester sugg(h);

    server.set_work_delay(100);
    std::vector<std::future<std::string>> calls;
    for (int i = 0; i < 6; ++i)
        calls.push_back(std::async(std::launch::async, [&] { return sugg.suggest(scene.image, "q", 2); }));
    for (auto& f : calls) CHECK(!f.get().empty());
    CHECK(server.max_in_flight() <= 2);
    CHECK(server.max_in_flight() >= 1);

    auto const seen = server.seen();
    std::set<std::string> keys;
    for (auto const& s : seen) {
        CHECK(s.authorization == "Bearer tok123");
        keys.insert(s.idempotency_key);
    }
    CHECK(keys.size() == seen.size());

    HttpClickSuggester anon(http_handle(Capability::ClickSuggest, server.endpoint()));
    server.set_work_delay(0);
    anon.suggest(scene.image, "q", 2);
    CHECK(server.seen().back().authorization.empty());
}

TEST_CASE("unreachable endpoints") {
    // Bind a port without listening so connections are refused.
    int const fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    REQUIRE(::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
    socklen_t len = sizeof addr;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    int const port = ntohs(addr.sin_port);
    auto h = http_handle(Capability::MaskProposals, "http://127.0.0.1:" + std::to_string(port));
    h.max_retries = 1;
    HttpMaskProposalProvider props(h);
    CHECK(kind_of([&] { props.propose(small_scene().image, 29); }) == ProviderError::Kind::Transport);

    CHECK_THROWS_AS(HttpSegmenter(http_handle(Capability::PromptableSegment, "https://x")), InvalidArgument);
    CHECK_THROWS_AS(HttpSegmenter(http_handle(Capability::PromptableSegment, "")), InvalidArgument);
    ::close(fd);
}
