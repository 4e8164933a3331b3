#pragma once

// Camera-to-floor pedestrian localization: homography calibration, feet
// estimation from boxes or occluded skeletons, multi-camera fusion, synthetic
// oracle scenes and the evaluation harness.

#include "floorloc/dataset.hpp"
#include "floorloc/errors.hpp"
#include "floorloc/evaluation.hpp"
#include "floorloc/feet.hpp"
#include "floorloc/fusion.hpp"
#include "floorloc/geometry.hpp"
#include "floorloc/pipeline.hpp"
#include "floorloc/synthetic.hpp"
#include "floorloc/util.hpp"
