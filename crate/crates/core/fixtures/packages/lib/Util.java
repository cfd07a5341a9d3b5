package lib;

public class Util {
    public static void log(String message) {}

    public static class Inner {
        void touch() {}
    }
}
