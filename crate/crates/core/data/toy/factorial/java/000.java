import java.util.*;

public class Runner {
    static long work(int y) {
        return y <= 1 ? 1 : y * work(y - 1);
    }

    public static void main(String[] args) {
        for (int pos = 1; pos <= 12; pos++) {
            System.out.printf("%s%n", work(pos));
        }
    }
}
