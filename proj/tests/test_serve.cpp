#include <fstream>
#include <thread>

#include <gtest/gtest.h>

#include "test_helpers.hpp"
#include "veasyguide/serve.hpp"

namespace vg = veasyguide;

namespace {

class ServeTest : public ::testing::Test {
 protected:
  void SetUp() override {
    manifest_ = R"({"activities":[],"params":{},"shots":[],"version":1})";
    video_.resize(5000);
    for (std::size_t k = 0; k < video_.size(); ++k) video_[k] = static_cast<char>(k * 7 % 251);
    std::ofstream(dir_ / "m.json", std::ios::binary) << manifest_;
    std::ofstream(dir_ / "v.mp4", std::ios::binary) << video_;
    vg::configure_server(server_, {dir_ / "m.json", dir_ / "v.mp4", std::nullopt});
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  TempDir dir_;
  std::string manifest_;
  std::string video_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST_F(ServeTest, ManifestIsJson) {
  httplib::Client c("127.0.0.1", port_);
  const auto res = c.Get("/api/manifest");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->body, manifest_);
  EXPECT_EQ(res->get_header_value("Content-Type"), "application/json");
}

TEST_F(ServeTest, VideoRangeRequest) {
  httplib::Client c("127.0.0.1", port_);
  const auto res = c.Get("/media/video", {{"Range", "bytes=0-1023"}});
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 206);
  EXPECT_EQ(res->body.size(), 1024u);
  EXPECT_EQ(res->body, video_.substr(0, 1024));
  EXPECT_EQ(res->get_header_value("Content-Type"), "video/mp4");

  const auto tail = c.Get("/media/video", {{"Range", "bytes=4000-"}});
  ASSERT_TRUE(tail);
  EXPECT_EQ(tail->status, 206);
  EXPECT_EQ(tail->body, video_.substr(4000));
}

TEST_F(ServeTest, WholeVideoWithoutRange) {
  httplib::Client c("127.0.0.1", port_);
  const auto res = c.Get("/media/video");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(res->body, video_);
}

TEST_F(ServeTest, UnknownPathIs404) {
  httplib::Client c("127.0.0.1", port_);
  const auto res = c.Get("/nonexistent");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 404);
}

TEST_F(ServeTest, RootServesPlaceholder) {
  httplib::Client c("127.0.0.1", port_);
  const auto res = c.Get("/");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_NE(res->body.find("/api/manifest"), std::string::npos);
}

TEST_F(ServeTest, BusyPortRefusesSecondBind) {
  httplib::Server other;
  vg::configure_server(other, {dir_ / "m.json", dir_ / "v.mp4", std::nullopt});
  EXPECT_FALSE(other.bind_to_port("127.0.0.1", port_));
}

TEST(Serve, MissingFilesThrow) {
  TempDir dir;
  httplib::Server s;
  EXPECT_THROW(vg::configure_server(s, {dir / "a.json", dir / "b.mp4", std::nullopt}), vg::Error);
}
