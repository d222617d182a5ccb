// Copyright 2026 The behavesim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Writes the synthetic timeline corpus under fixtures/timelines. Output is a
// pure function of the seed.
//
//   gen_fixtures <out_dir> [--seed N] [--users-per-platform N]

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "behavesim/behavior_model.h"
#include "behavesim/ingestion.h"
#include "behavesim/rng.h"

namespace {

using behavesim::BehaviorRecord;
using behavesim::Platform;
using behavesim::SeededRng;
using behavesim::UserProfile;
using behavesim::UserTimeline;

struct Topic {
  std::string community;
  std::vector<std::string> activities;
};

template <typename T>
const T& pick(SeededRng& rng, const std::vector<T>& items) {
  return items[rng.below(items.size())];
}

const std::vector<Topic> kEnglishTopics = {
    {"personalfinance",
     {"pay off student loans", "build an emergency fund", "switch to index funds",
      "negotiate a raise", "track every expense", "refinance a mortgage"}},
    {"programming",
     {"learn Rust", "refactor a legacy codebase", "write better unit tests",
      "contribute to open source", "move a service to Kubernetes",
      "debug memory leaks"}},
    {"cooking",
     {"bake sourdough bread", "cook weeknight curries", "meal prep on Sundays",
      "season a cast iron pan", "make fresh pasta", "ferment hot sauce"}},
    {"running",
     {"train for a first marathon", "fix shin splints", "run before work",
      "pick trail shoes", "join a running club", "hit a sub-25 5k"}},
    {"movies",
     {"rewatch the classic trilogy", "see indie films in theaters",
      "cancel a streaming service", "follow the awards season",
      "host a movie night", "collect physical media"}},
    {"gardening",
     {"grow tomatoes on a balcony", "start a compost bin", "keep houseplants alive",
      "plant a pollinator garden", "build raised beds", "save seeds"}},
};

const std::vector<std::string> kTitleForms = {
    "What is the best way to {}?", "Anyone else trying to {}?",
    "Finally managed to {} after a year", "Is it worth it to {}?",
    "Tips for people who want to {}", "Unpopular opinion: nobody needs to {}"};
const std::vector<std::string> kOpeners = {
    "Honestly,", "In my experience,", "For what it's worth,", "I think",
    "Same here:", "Quick update:", "Hot take:", "Small thing, but"};
const std::vector<std::string> kMiddles = {
    "trying to {} took longer than expected",
    "my plan to {} is finally moving",
    "the advice on how to {} is all over the place",
    "deciding to {} changed my weekly routine",
    "anyone who wants to {} should start small"};
const std::vector<std::string> kPositiveTails = {
    "and it has been great so far.", "and I love the results.",
    "which was totally worth it.", "and the community support is amazing."};
const std::vector<std::string> kNegativeTails = {
    "but the fees are terrible.", "and honestly it was a frustrating mess.",
    "but I am disappointed with the outcome.", "and the whole thing felt like a scam."};
const std::vector<std::string> kNeutralTails = {
    "so we will see how it goes.", "more details next week.",
    "still figuring out the schedule.", "numbers are in the spreadsheet."};

const std::vector<Topic> kChineseTopics = {
    {"职场", {"跳槽到互联网公司", "准备年终述职", "和领导沟通加薪", "转行做产品经理", "远程办公"}},
    {"编程", {"自学机器学习", "维护老旧代码", "参加开源项目", "准备算法面试", "学习分布式系统"}},
    {"摄影", {"入门街头摄影", "挑选第一台相机", "练习人像布光", "后期调色", "拍摄城市夜景"}},
    {"旅行", {"一个人去西藏", "周末短途自驾", "带父母出国旅行", "规划穷游路线", "体验青年旅舍"}},
    {"教育", {"辅导孩子写作业", "准备考研", "选择国际学校", "培养阅读习惯", "学习第二外语"}},
    {"健康", {"坚持早睡早起", "开始力量训练", "控制饮食减脂", "缓解颈椎疼痛", "戒掉熬夜"}},
};

const std::vector<std::string> kZhTitleForms = {
    "{}是一种怎样的体验？", "如何看待{}？", "新手应该如何开始{}？",
    "{}有哪些值得注意的地方？", "为什么越来越多的人选择{}？"};
const std::vector<std::string> kZhOpeners = {"说实话，", "从我的经验来看，", "个人觉得，",
                                             "补充一点，", "简单说两句，"};
const std::vector<std::string> kZhMiddles = {"{}需要长期坚持，", "{}比想象中复杂，",
                                             "关于{}的建议很多，", "决定{}之后生活节奏变了，"};
const std::vector<std::string> kZhPositiveTails = {"结果让人很满意。", "非常值得推荐。",
                                                   "整体体验很不错。"};
const std::vector<std::string> kZhNegativeTails = {"但过程真的很让人焦虑。", "最后还是有点失望。",
                                                   "中间遇到的问题太多了。"};
const std::vector<std::string> kZhNeutralTails = {"具体还要看个人情况。", "后续再来更新。",
                                                  "细节以后慢慢补充。"};

std::string fill(const std::string& form, const std::string& value) {
  auto at = form.find("{}");
  return form.substr(0, at) + value + form.substr(at + 2);
}

std::string english_title(SeededRng& rng, const Topic& topic) {
  return fill(pick(rng, kTitleForms), pick(rng, topic.activities));
}

std::string english_text(SeededRng& rng, const Topic& topic) {
  const auto& tails = rng.below(3) == 0   ? kPositiveTails
                      : rng.below(2) == 0 ? kNegativeTails
                                          : kNeutralTails;
  return pick(rng, kOpeners) + " " + fill(pick(rng, kMiddles), pick(rng, topic.activities)) +
         " " + pick(rng, tails);
}

std::string chinese_title(SeededRng& rng, const Topic& topic) {
  return fill(pick(rng, kZhTitleForms), pick(rng, topic.activities));
}

std::string chinese_text(SeededRng& rng, const Topic& topic) {
  const auto& tails = rng.below(3) == 0   ? kZhPositiveTails
                      : rng.below(2) == 0 ? kZhNegativeTails
                                          : kZhNeutralTails;
  return pick(rng, kZhOpeners) + fill(pick(rng, kZhMiddles), pick(rng, topic.activities)) +
         pick(rng, tails);
}

const std::vector<std::string> kRedditNames = {
    "maple_runner", "quiet_ledger", "byte_farmer", "saltyskillet",
    "trailhead_ty", "reel_critic", "compost_queen", "null_pointer_pat",
    "budget_bea", "loaf_lord"};
const std::vector<std::string> kTwitterNames = {
    "DanaWritesCode", "MarcoEats", "PaceSetterJo", "FilmFrameLee",
    "GreenThumbAli", "FrugalFinn", "OpenSourceOla", "MileMarkerMo",
    "CinephileSam", "SeedSaverRu"};
const std::vector<std::string> kZhihuNames = {
    "山间晚风", "代码搬运工", "光影旅人", "考研上岸记", "早睡早起的猫",
    "北漂产品汪", "背包客小林", "读书的鲸鱼", "健身新手村", "夜拍爱好者"};

struct PlatformPlan {
  Platform platform;
  const std::vector<Topic>* topics;
  const std::vector<std::string>* names;
  // (type name, weight)
  std::vector<std::pair<std::string, int>> types;
};

BehaviorRecord make_behavior(SeededRng& rng, Platform platform,
                             const std::string& type, const Topic& topic,
                             const std::string& other_user) {
  const bool zh = platform == Platform::kZhihu;
  BehaviorRecord b;
  b.type_name = type;
  const auto& spec = behavesim::BehaviorRegistry::default_registry().lookup(platform, type);
  if (spec.needs_target) {
    if (platform == Platform::kTwitter) {
      b.target = "@" + other_user + ": " + english_text(rng, topic);
    } else if (zh && (type == "agree answer" || type == "bookmark answer" ||
                      type == "approve answer")) {
      b.target = other_user + "的回答：" + chinese_text(rng, topic);
    } else if (zh && (type == "agree article" || type == "bookmark article")) {
      b.target = "文章《" + fill(pick(rng, kZhTitleForms), pick(rng, topic.activities)) + "》";
    } else {
      b.target = zh ? chinese_title(rng, topic) : english_title(rng, topic);
    }
  }
  if (spec.needs_content) b.content = zh ? chinese_text(rng, topic) : english_text(rng, topic);
  if (platform != Platform::kTwitter) b.community = topic.community;
  return b;
}

std::vector<UserTimeline> generate(std::uint64_t seed, std::size_t users_per_platform) {
  const std::vector<PlatformPlan> plans = {
      {Platform::kReddit, &kEnglishTopics, &kRedditNames, {{"comment", 7}, {"post", 3}}},
      {Platform::kTwitter,
       &kEnglishTopics,
       &kTwitterNames,
       {{"replied to", 3}, {"post", 2}, {"like", 3}, {"quoted", 1}, {"retweet", 2}}},
      {Platform::kZhihu,
       &kChineseTopics,
       &kZhihuNames,
       {{"answer", 4}, {"new question", 1}, {"opinion", 1}, {"post article", 1},
        {"update question", 1}, {"agree answer", 2}, {"follow question", 1},
        {"agree article", 1}, {"bookmark article", 1}, {"bookmark answer", 1},
        {"approve answer", 1}}},
  };
  // 2024-01-01T00:00:00Z plus up to 182 days.
  const auto start = behavesim::parse_timestamp("2024-01-01 00:00:00");
  constexpr std::uint64_t kSpan = 182ULL * 86400ULL;

  std::vector<UserTimeline> out;
  for (const auto& plan : plans) {
    const auto& names = *plan.names;
    const std::size_t n_users = std::min(users_per_platform, names.size());
    int total_weight = 0;
    for (const auto& t : plan.types) total_weight += t.second;
    for (std::size_t u = 0; u < n_users; ++u) {
      SeededRng rng(behavesim::derive_seed(seed, out.size() + 1));
      const auto& topics = *plan.topics;
      // Two or three favourite topics per user, overlapping with neighbours.
      std::vector<const Topic*> favourites;
      for (std::size_t k = 0; k < 2 + (u % 2); ++k) {
        favourites.push_back(&topics[(u + k * 2) % topics.size()]);
      }
      UserProfile profile;
      profile.username = names[u];
      profile.platform = plan.platform;
      for (const auto* t : favourites) profile.interests.push_back(t->community);
      if (plan.platform == Platform::kZhihu) {
        profile.description = "关注" + favourites.front()->community + "和" +
                               favourites.back()->community + "，偶尔写写长回答。";
      } else {
        profile.description = "Mostly here for " + favourites.front()->community +
                              " and " + favourites.back()->community + ".";
      }
      const std::size_t n_behaviors = 90 + rng.below(21);
      std::vector<BehaviorRecord> behaviors;
      for (std::size_t i = 0; i < n_behaviors; ++i) {
        int roll = static_cast<int>(rng.below(static_cast<std::uint64_t>(total_weight)));
        std::string type;
        for (const auto& [name, w] : plan.types) {
          if (roll < w) {
            type = name;
            break;
          }
          roll -= w;
        }
        const auto& topic = *favourites[rng.below(favourites.size())];
        const auto& other = names[(u + 1 + rng.below(names.size() - 1)) % names.size()];
        auto b = make_behavior(rng, plan.platform, type, topic, other);
        b.timestamp = start + std::chrono::seconds(rng.below(kSpan));
        behaviors.push_back(std::move(b));
      }
      out.push_back(behavesim::make_timeline(std::move(profile), std::move(behaviors)));
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: gen_fixtures <out_dir> [--seed N] [--users-per-platform N]\n";
    return 2;
  }
  std::string out_dir = argv[1];
  std::uint64_t seed = 20240601;
  std::size_t users = 8;
  for (int i = 2; i + 1 < argc; i += 2) {
    std::string flag = argv[i];
    if (flag == "--seed") {
      seed = std::strtoull(argv[i + 1], nullptr, 10);
    } else if (flag == "--users-per-platform") {
      users = std::strtoull(argv[i + 1], nullptr, 10);
    } else {
      std::cerr << "unknown flag " << flag << "\n";
      return 2;
    }
  }
  try {
    std::filesystem::create_directories(out_dir);
    auto timelines = generate(seed, users);
    behavesim::write_timelines(timelines, out_dir);
    std::cout << "wrote " << timelines.size() << " timelines to " << out_dir << "\n";
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
