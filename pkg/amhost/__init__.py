# AM host package: invoking adaptation managers in-process or over stdio
