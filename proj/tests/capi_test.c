/*
 * Copyright 2026 The behavesim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* Exercises the shared library from plain C. */

#include <stdio.h>
#include <string.h>

#include "behavesim/behavesim.h"

static int failures = 0;

#define CHECK(cond)                                                   \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "%s:%d: check failed: %s (%s)\n", __FILE__,     \
              __LINE__, #cond, bsim_last_error());                    \
      ++failures;                                                     \
    }                                                                 \
  } while (0)

static void test_parsing(void) {
  char letter = 0;
  char* json = NULL;
  CHECK(bsim_extract_answer("Therefore, the answer is (C).", 4, &letter) == BSIM_OK);
  CHECK(letter == 'C');
  CHECK(bsim_extract_answer("maybe B or C", 4, &letter) == BSIM_UNPARSEABLE);
  CHECK(strlen(bsim_last_error()) > 0);
  CHECK(strcmp(bsim_status_name(BSIM_UNPARSEABLE), "Unparseable") == 0);
  CHECK(bsim_parse_segments("<ANA>x</ANA><MEM>y</MEM>Therefore, the behavior type is A.Comment",
                            &json) == BSIM_OK);
  CHECK(json && strstr(json, "\"letter\":\"A\""));
  bsim_string_free(json);
  json = NULL;
  CHECK(bsim_parse_segments("<ANA>x<MEM>y</MEM>", &json) == BSIM_MALFORMED_TAGS);
  CHECK(json == NULL);
  CHECK(bsim_detect_leakage("Option (B) fits.\nTherefore, the answer is (B).", "t", 'B', 8, 0.6,
                            &json) == BSIM_OK);
  CHECK(json && strstr(json, "LetterBeforeDecision"));
  bsim_string_free(json);
  CHECK(bsim_extract_answer(NULL, 4, &letter) == BSIM_INVALID_ARGUMENT);
}

static void test_pipeline(const char* timelines) {
  bsim_registry* reg = NULL;
  bsim_corpus* corpus = NULL;
  bsim_question_set* qs = NULL;
  bsim_gateway* gw = NULL;
  bsim_report* report = NULL;
  char* stats = NULL;
  double f1 = -1, acc = -1;

  CHECK(bsim_registry_default(&reg) == BSIM_OK);
  CHECK(bsim_corpus_load(reg, timelines, NULL, &corpus) == BSIM_OK);
  CHECK(bsim_corpus_size(corpus) > 0);
  CHECK(bsim_questions_build(corpus, reg, "{\"seed\":7}", &qs, &stats) == BSIM_OK);
  CHECK(bsim_questions_size(qs) > 0);
  bsim_string_free(stats);
  CHECK(bsim_gateway_create("{\"backend\":\"mock:always-gold\",\"concurrency\":2}", &gw) ==
        BSIM_OK);
  CHECK(bsim_evaluate(qs, corpus, gw, "{\"trials\":1,\"bogus\":1}", &report) ==
        BSIM_INVALID_ARGUMENT);
  CHECK(bsim_evaluate(qs, corpus, gw, "{\"trials\":1,\"run_label\":\"c\"}", &report) == BSIM_OK);
  CHECK(bsim_report_cell(report, "Reddit", "type", &f1, &acc) == BSIM_OK);
  CHECK(f1 == 100.0 && acc == 100.0);
  CHECK(bsim_report_cell(report, "Myspace", "type", &f1, &acc) != BSIM_OK);

  bsim_report_free(report);
  bsim_gateway_free(gw);
  bsim_questions_free(qs);
  bsim_corpus_free(corpus);
  bsim_registry_free(reg);
  bsim_registry_free(NULL);
}

int main(int argc, char** argv) {
  if (argc != 2) {
    fprintf(stderr, "usage: capi_test <timelines>\n");
    return 2;
  }
  CHECK(strlen(bsim_version()) > 0);
  test_parsing();
  test_pipeline(argv[1]);
  if (failures) fprintf(stderr, "%d check(s) failed\n", failures);
  return failures ? 1 : 0;
}
