# Tests package for the WSC Toolkit
