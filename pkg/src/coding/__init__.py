# coding package
