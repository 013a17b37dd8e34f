#pragma once

#include "nandcim/adc.hpp"
#include "nandcim/calibration.hpp"
#include "nandcim/cam.hpp"
#include "nandcim/cell.hpp"
#include "nandcim/common.hpp"
#include "nandcim/encoding.hpp"
#include "nandcim/execute.hpp"
#include "nandcim/input_limit.hpp"
#include "nandcim/mapping.hpp"
#include "nandcim/perf.hpp"
#include "nandcim/plane.hpp"
#include "nandcim/string_model.hpp"
#include "nandcim/variation.hpp"
#include "nandcim/workload.hpp"
