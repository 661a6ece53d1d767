#pragma once

#include "npspec/error.hpp"
#include "npspec/parallel.hpp"
#include "npspec/fourier.hpp"
#include "npspec/geometry.hpp"
#include "npspec/operator.hpp"
#include "npspec/polarization.hpp"
#include "npspec/recovery.hpp"
#include "npspec/shape_calculus.hpp"
#include "npspec/designer.hpp"
#include "npspec/pulse.hpp"
#include "npspec/multibody.hpp"
