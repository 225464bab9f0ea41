import java.util.*;

public class Main {
    static long compute(int y) {
        long num = 1;
        for (int pos = 2; pos <= y; pos += 1) {
            num *= pos;
        }
        return num;
    }

    public static void main(String[] args) {
        System.out.printf("%s%n", compute(11));
    }
}
