#include <doctest.h>

#include "aqua/unet.hpp"
