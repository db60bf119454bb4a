#!/usr/bin/env node
import { serve } from "./server";

serve();
