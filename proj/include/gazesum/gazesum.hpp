#pragma once

#include "gazesum/alignment.hpp"
#include "gazesum/attention_classifier.hpp"
#include "gazesum/common.hpp"
#include "gazesum/eval_harness.hpp"
#include "gazesum/gaze_events.hpp"
#include "gazesum/heatmap.hpp"
#include "gazesum/llm_gateway.hpp"
#include "gazesum/pipeline.hpp"
#include "gazesum/png.hpp"
#include "gazesum/promptgen.hpp"
#include "gazesum/session_service.hpp"
#include "gazesum/stats.hpp"
#include "gazesum/synth_gaze.hpp"
#include "gazesum/text_layout.hpp"
